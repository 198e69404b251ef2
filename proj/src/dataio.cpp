#include "fmapdiag/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "fmapdiag/error.hpp"
#include "fmapdiag/rng.hpp"

namespace fmapdiag {
namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& cell, std::size_t row, std::size_t col) {
  // strtod accepts "nan"/"inf"; those are caught by the finiteness check.
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw FormatError("malformed number '" + cell + "' at row " + std::to_string(row) + ", column " +
                      std::to_string(col));
  }
  return v;
}

long long parse_int(const std::string& cell, std::size_t line_no) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw FormatError("malformed anchor line " + std::to_string(line_no) + ": '" + cell + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Eigen::MatrixXd data, std::string modality_tag)
    : data_(std::move(data)), tag_(std::move(modality_tag)) {
  if (data_.rows() < 2) throw InvalidArgument("embedding matrix needs at least 2 rows");
  if (data_.cols() < 1) throw InvalidArgument("embedding matrix needs at least 1 column");
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      if (!std::isfinite(data_(i, j))) {
        throw FormatError("non-finite entry at row " + std::to_string(i) + ", column " + std::to_string(j));
      }
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::truncated(Eigen::Index d) const {
  if (d < 1 || d > dim()) throw InvalidArgument("truncation dimension out of range");
  return EmbeddingMatrix(data_.leftCols(d), tag_);
}

EmbeddingFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? EmbeddingFormat::csv : EmbeddingFormat::binary;
}

Eigen::MatrixXd load_matrix_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.empty()) throw FormatError(path.string() + ": empty file");
  if (bytes.size() < 12 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(path.string() + ": missing EMB1 header");
  }
  const std::uint32_t n = get_u32(bytes.data() + 4);
  const std::uint32_t d = get_u32(bytes.data() + 8);
  const std::uint64_t expected = 12 + 4ull * n * d;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": shape mismatch, header declares " + std::to_string(n) + "x" +
                      std::to_string(d) + " (" + std::to_string(expected) + " bytes) but file has " +
                      std::to_string(bytes.size()) + " bytes");
  }
  Eigen::MatrixXd m(n, d);
  const unsigned char* p = bytes.data() + 12;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j, p += 4) {
      m(i, j) = static_cast<double>(std::bit_cast<float>(get_u32(p)));
    }
  }
  return m;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  const std::string tag = path.stem().string();
  if (format == EmbeddingFormat::binary) return EmbeddingMatrix(load_matrix_binary(path), tag);

  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) row.push_back(parse_real(cells[j], rows.size(), j));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ": row " + std::to_string(rows.size()) + " has " +
                        std::to_string(row.size()) + " values, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return EmbeddingMatrix(std::move(m), tag);
}

void save_matrix_binary(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("matrix too large for EMB1 format");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void save_embeddings(const EmbeddingMatrix& z, const std::filesystem::path& path) {
  save_matrix_binary(z.data(), path);
}

void save_embeddings_csv(const EmbeddingMatrix& z, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < z.n_points(); ++i) {
    for (Eigen::Index j = 0; j < z.dim(); ++j) {
      if (j) out << ',';
      out << z.data()(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

AnchorSet::AnchorSet(std::vector<AnchorPair> pairs, Eigen::Index n_points, std::uint64_t seed)
    : pairs_(std::move(pairs)), seed_(seed) {
  std::set<Eigen::Index> sources;
  std::set<Eigen::Index> targets;
  for (const auto& p : pairs_) {
    if (p.source < 0 || p.source >= n_points || p.target < 0 || p.target >= n_points) {
      throw InvalidArgument("anchor (" + std::to_string(p.source) + "," + std::to_string(p.target) +
                            ") out of range [0, " + std::to_string(n_points) + ")");
    }
    if (!sources.insert(p.source).second) {
      throw InvalidArgument("duplicate anchor source index " + std::to_string(p.source));
    }
    if (!targets.insert(p.target).second) {
      throw InvalidArgument("duplicate anchor target index " + std::to_string(p.target));
    }
  }
}

std::vector<Eigen::Index> AnchorSet::source_indices() const {
  std::vector<Eigen::Index> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.source);
  return out;
}

std::vector<Eigen::Index> AnchorSet::target_indices() const {
  std::vector<Eigen::Index> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.target);
  return out;
}

AnchorSet sample_anchors(Eigen::Index n_points, std::size_t budget, std::uint64_t seed) {
  if (n_points < 0 || budget > static_cast<std::size_t>(n_points)) {
    throw InvalidArgument("anchor budget " + std::to_string(budget) + " exceeds point count " +
                          std::to_string(n_points));
  }
  // Partial Fisher-Yates: the first `budget` slots are a uniform sample.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_points));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng(seed);
  std::vector<AnchorPair> pairs;
  pairs.reserve(budget);
  for (std::size_t i = 0; i < budget; ++i) {
    const auto j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
    pairs.push_back({idx[i], idx[i]});
  }
  return AnchorSet(std::move(pairs), n_points, seed);
}

AnchorSet load_anchor_set(const std::filesystem::path& path, Eigen::Index n_points) {
  auto in = open_in(path);
  std::vector<AnchorPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 2) {
      throw FormatError("malformed anchor line " + std::to_string(line_no) + ": expected 'src,dst'");
    }
    pairs.push_back({parse_int(cells[0], line_no), parse_int(cells[1], line_no)});
  }
  return AnchorSet(std::move(pairs), n_points);
}

void PipelineConfig::validate(Eigen::Index n_points) const {
  auto fail = [](const std::string& m) { throw InvalidArgument(m); };
  if (knn_k < 1) fail("knn_k must be >= 1");
  if (knn_k >= n_points) fail("knn_k must be < N");
  if (spectral_dim < 1 || spectral_dim >= n_points - 1) fail("spectral_dim must satisfy 1 <= k_s < N-1");
  if (zoomout) {
    if (zoomout_start > zoomout_max) fail("zoomout start exceeds zoomout max");
    if (zoomout_max > n_points - 1) fail("zoomout max must be <= N-1");
    if (zoomout_steps < 1) fail("zoomout steps must be >= 1");
    if (zoomout_start != spectral_dim) fail("zoomout start must equal spectral_dim");
  }
  if (!(lambda_comm >= 0.0) || !(lambda_tik >= 0.0)) fail("lambda_comm and lambda_tik must be nonnegative");
  if (!(probe_smoothing >= 0.0)) fail("probe_smoothing must be nonnegative");
  if (hks_num_scales < 1) fail("hks_num_scales must be >= 1");
  if (recall_cutoffs.empty()) fail("recall_cutoffs must not be empty");
  for (int k : recall_cutoffs) {
    if (k < 1) fail("recall cutoffs must be >= 1");
  }
  if (captions_per_image < 1) fail("captions_per_image must be >= 1");
  if (!(cca_ridge >= 0.0)) fail("cca_ridge must be nonnegative");
}

}  // namespace fmapdiag
