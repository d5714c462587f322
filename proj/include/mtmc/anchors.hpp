#pragma once

#include "mtmc/datamodel.hpp"
#include "mtmc/kmeans.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mtmc {

/// K world-frame 3D anchor centers clustered from ground-truth boxes.
struct AnchorBank {
  Eigen::Matrix3Xd centers;
  std::uint64_t seed = 0;
  double inertia = 0.0;
  std::vector<double> inertia_history;

  Eigen::Index k() const { return centers.cols(); }
};

/// One column per ground-truth detection, ordered by frame then track id.
Eigen::Matrix3Xd collect_centers(const Sequence& gt);

AnchorBank generate_anchor_bank(const Eigen::Matrix3Xd& points, Eigen::Index k, std::uint64_t seed,
                                int max_iter = 300, double tol = 1e-6, int threads = 1);

/// Sum of squared distances from each point to its nearest anchor.
double anchor_inertia(const AnchorBank& bank, const Eigen::Matrix3Xd& points);

// Anchor CSV: a `# k=<k>, seed=<seed>, inertia=<inertia>` header followed by
// one `x,y,z` row per anchor. Values use shortest round-trip formatting.
void emit_anchor_bank(const AnchorBank& bank, std::ostream& out);
AnchorBank parse_anchor_bank(std::istream& in, const std::string& source = {});

void write_anchor_file(const AnchorBank& bank, const std::filesystem::path& path);
AnchorBank read_anchor_file(const std::filesystem::path& path);

}  // namespace mtmc
