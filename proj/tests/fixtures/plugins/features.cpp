// Parameter and registration behaviour: one parameter of each type, a live one, and an RGB preview
// registered whether or not a UI is attached.
#include <string>

#include "fixture.hpp"

namespace features {

namespace api = fixture::api;

int max_features;
double scale;
bool skip_pose;
std::string label;
bool preview_registered = false;

const int d_features = 1000;
const double d_scale = 1.0;
const bool d_skip = false;
const std::string d_label = "orb";

bool new_slam_configuration(api::SBConfig* cfg) {
  return cfg->add_parameter(api::TypedParameter<int>("mf", "max-features", "features per frame", &max_features,
                                                      &d_features, std::pair{100.0, 5000.0})) &&
         cfg->add_parameter(api::TypedParameter<double>("sc", "scale", "pyramid scale", &scale, &d_scale,
                                                         std::pair{0.5, 2.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<bool>("np", "no-pose", "skip the pose channel", &skip_pose, &d_skip)) &&
         cfg->add_parameter(api::TypedParameter<std::string>("l", "label", "free text", &label, &d_label));
}

bool init_slam_system(api::SBConfig* cfg) {
  preview_registered = cfg->register_output("preview", api::OutputKind::RgbFrame);
  return skip_pose || fixture::register_pose(cfg);
}
bool update_frame(api::SBConfig* c, api::SBFrame* f) { return fixture::accept(c, f); }
bool process_once(api::SBConfig*) { return true; }
bool update_outputs(api::SBConfig* c) {
  if (preview_registered) {
    const std::uint8_t px[3] = {1, 2, 3};
    if (!c->publish_rgb_frame("preview", fixture::g_last, 1, 1, px)) return false;
  }
  return fixture::publish_identity(c);
}
bool clean_slam_system() { return true; }

}  // namespace features

SLAMBENCH_EXPORT_PLUGIN(features)
