// Keeps 1 MiB more per processed frame, like a map that only grows.
#include <cstring>
#include <memory>
#include <vector>

#include "fixture.hpp"

namespace grower {

std::vector<std::unique_ptr<char[]>> g_blocks;

bool new_slam_configuration(fixture::api::SBConfig*) { return true; }
bool init_slam_system(fixture::api::SBConfig* c) {
  g_blocks.reserve(4096);
  return fixture::register_pose(c) && c->register_output("map", fixture::api::OutputKind::MemoryCounter);
}
bool update_frame(fixture::api::SBConfig* c, fixture::api::SBFrame* f) { return fixture::accept(c, f); }
bool process_once(fixture::api::SBConfig*) {
  auto block = std::make_unique<char[]>(1 << 20);
  std::memset(block.get(), 1, 1 << 20);
  g_blocks.push_back(std::move(block));
  return true;
}
bool update_outputs(fixture::api::SBConfig* c) {
  return fixture::publish_identity(c) && c->publish_memory("map", fixture::g_last, g_blocks.size() << 20);
}
bool clean_slam_system() {
  g_blocks.clear();
  g_blocks.shrink_to_fit();
  return true;
}

}  // namespace grower

SLAMBENCH_EXPORT_PLUGIN(grower)
