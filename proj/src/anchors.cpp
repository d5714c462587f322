#include "mtmc/anchors.hpp"

#include "mtmc/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string_view>

namespace mtmc {

Eigen::Matrix3Xd collect_centers(const Sequence& gt) {
  std::vector<const Detection*> ordered;
  for (const auto& frame : gt.frames) {
    const std::size_t begin = ordered.size();
    for (const auto& d : frame.detections) ordered.push_back(&d);
    std::stable_sort(ordered.begin() + static_cast<std::ptrdiff_t>(begin), ordered.end(),
                     [](const Detection* a, const Detection* b) { return a->track_id < b->track_id; });
  }
  if (ordered.empty()) throw InputError("collect_centers: ground truth has no detections");
  Eigen::Matrix3Xd points(3, static_cast<Eigen::Index>(ordered.size()));
  for (std::size_t i = 0; i < ordered.size(); ++i) points.col(static_cast<Eigen::Index>(i)) = ordered[i]->box.center;
  return points;
}

AnchorBank generate_anchor_bank(const Eigen::Matrix3Xd& points, Eigen::Index k, std::uint64_t seed, int max_iter,
                                double tol, int threads) {
  if (k < 1) throw InputError("anchor count k must be >= 1");
  if (points.cols() < k) {
    throw InputError("anchor count k=" + std::to_string(k) + " exceeds the " + std::to_string(points.cols()) +
                     " available points");
  }
  KMeansOptions options;
  options.k = k;
  options.seed = seed;
  options.max_iter = max_iter;
  options.tol = tol;
  options.threads = threads;
  auto result = kmeans(points, options);

  AnchorBank bank;
  bank.centers = std::move(result.centers);
  bank.seed = seed;
  bank.inertia = result.inertia;
  bank.inertia_history = std::move(result.inertia_history);
  return bank;
}

double anchor_inertia(const AnchorBank& bank, const Eigen::Matrix3Xd& points) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    total += (bank.centers.colwise() - points.col(i)).colwise().squaredNorm().minCoeff();
  }
  return total;
}

namespace {

std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text, const std::string& source, std::size_t line, std::size_t column) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError(source, line, column, "expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void emit_anchor_bank(const AnchorBank& bank, std::ostream& out) {
  std::string buffer = "# k=" + std::to_string(bank.k()) + ", seed=" + std::to_string(bank.seed) +
                       ", inertia=" + shortest(bank.inertia) + "\n";
  for (Eigen::Index c = 0; c < bank.k(); ++c) {
    buffer += shortest(bank.centers(0, c)) + "," + shortest(bank.centers(1, c)) + "," + shortest(bank.centers(2, c)) +
              "\n";
  }
  out << buffer;
  if (!out) throw std::runtime_error("anchor sink write failure");
}

AnchorBank parse_anchor_bank(std::istream& in, const std::string& source) {
  AnchorBank bank;
  std::optional<long long> declared_k;
  bool have_header = false;
  std::vector<Eigen::Vector3d> rows;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (text.find("k=") == std::string_view::npos) continue;
      have_header = true;
      // "# k=<k>, seed=<seed>, inertia=<inertia>"
      text.remove_prefix(1);
      std::size_t pos = 0;
      while (pos < text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string_view item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        const std::size_t eq = item.find('=');
        if (eq != std::string_view::npos) {
          const std::string_view key = item.substr(0, eq);
          const std::string_view value = item.substr(eq + 1);
          if (key == "k") {
            declared_k = static_cast<long long>(parse_double(value, source, line_no, 0));
          } else if (key == "seed") {
            std::uint64_t seed = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
              throw ParseError(source, line_no, 0, "invalid seed '" + std::string(value) + "'");
            }
            bank.seed = seed;
          } else if (key == "inertia") {
            bank.inertia = parse_double(value, source, line_no, 0);
          }
        }
        pos = comma + 1;
      }
      continue;
    }
    std::array<double, 3> xyz{};
    std::size_t start = 0;
    for (std::size_t col = 0; col < 3; ++col) {
      const std::size_t comma = text.find(',', start);
      const bool last = col == 2;
      if (!last && comma == std::string_view::npos) {
        throw ParseError(source, line_no, col + 2, "expected 3 columns x,y,z");
      }
      if (last && comma != std::string_view::npos) {
        throw ParseError(source, line_no, 4, "expected 3 columns x,y,z");
      }
      const std::size_t end = last ? text.size() : comma;
      xyz[col] = parse_double(text.substr(start, end - start), source, line_no, col + 1);
      start = end + 1;
    }
    rows.emplace_back(xyz[0], xyz[1], xyz[2]);
  }

  if (!have_header) throw ParseError(source, line_no, 0, "missing '# k=..., seed=..., inertia=...' header");
  if (rows.empty()) throw ParseError(source, line_no, 0, "anchor bank has no rows");
  if (declared_k && *declared_k != static_cast<long long>(rows.size())) {
    throw ParseError(source, line_no, 0,
                     "header declares k=" + std::to_string(*declared_k) + " but " + std::to_string(rows.size()) +
                         " rows follow");
  }
  bank.centers.resize(3, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) bank.centers.col(static_cast<Eigen::Index>(i)) = rows[i];
  return bank;
}

void write_anchor_file(const AnchorBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  emit_anchor_bank(bank, out);
}

AnchorBank read_anchor_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return parse_anchor_bank(in, path.string());
}

}  // namespace mtmc
