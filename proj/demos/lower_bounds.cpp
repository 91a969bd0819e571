// Computes the lower-bound family on two small point clouds: flb and slb
// are both dominated by tlb, and stlb is a cheaper sliced relaxation that
// sits below tlb by a dimension-dependent factor. flb and slb are not
// ordered with respect to each other in general.
#include <cstdio>

#include "gwb/gwb.hpp"

int main() {
  gwb::Rng rng(7);
  auto cloud = [&](std::size_t n, double stretch) {
    gwb::Matrix pts(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      pts(i, 0) = stretch * rng.normal();
      pts(i, 1) = rng.normal();
    }
    return gwb::mm_from_point_cloud(gwb::PointCloud(std::move(pts)));
  };
  const gwb::MmSpace x = cloud(24, 1.0);
  const gwb::MmSpace y = cloud(30, 2.5);

  gwb::BoundConfig cfg;
  cfg.p = 2.0;
  cfg.num_projections = 500;
  cfg.seed = 7;

  const auto flb = gwb::flb(x, y, cfg.p);
  const auto slb = gwb::slb(x, y, cfg.p);
  const auto tlb = gwb::tlb(x, y, cfg);
  cfg.rule = gwb::midpoint_rule(16);
  const auto stlb = gwb::stlb(x, y, cfg);

  std::printf("flb  = %.6f\n", flb.value);
  std::printf("slb  = %.6f\n", slb.value);
  std::printf("tlb  = %.6f\n", tlb.value);
  std::printf("stlb = %.6f (mc std %.2e, %zu directions)\n", stlb.value,
              stlb.metadata.mc_std, cfg.num_projections);
  return 0;
}
