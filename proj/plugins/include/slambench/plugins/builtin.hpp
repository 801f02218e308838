#pragma once

#include "slambench/api/sb_api.hpp"

// Entry points of the reference plugins when linked statically (one instance per process).
namespace slambench::plugins {
namespace gt_replay {
api::EntryPoints entry_points();
}
namespace noisy_replay {
api::EntryPoints entry_points();
}
namespace icp_odometry {
api::EntryPoints entry_points();
}
}  // namespace slambench::plugins
