#include <CLI11.hpp>

#include <iostream>

#include "slambench/error.hpp"
#include "slambench/ingest/converters.hpp"
#include "slambench/ingest/synthetic.hpp"

namespace ingest = slambench::ingest;

int main(int argc, char** argv) {
  CLI::App app{"Converts dataset directories into .slam datafiles or generates the synthetic room."};
  std::string format;
  std::string input;
  std::string config;
  std::string output;
  std::string point_cloud;
  app.add_option("--format", format, "Source layout")
      ->required()
      ->check(CLI::IsMember({"tum", "icl-nuim", "euroc", "synthetic"}));
  app.add_option("--input", input, "Dataset directory");
  app.add_option("--config", config, "Synthetic scene key=value file (defaults when omitted)");
  app.add_option("--output", output, "Output datafile")->required();
  app.add_option("--point-cloud", point_cloud, "ICL-NUIM scene cloud (.ply or .xyz)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    ingest::ConversionSummary summary;
    if (format == "synthetic") {
      const auto cfg = config.empty() ? ingest::SyntheticSceneConfig{} : ingest::load_synthetic_config(config);
      summary = ingest::generate_synthetic(cfg, output);
    } else {
      if (input.empty()) {
        std::cerr << "error: --input is required for --format " << format << '\n';
        return 2;
      }
      if (format == "tum") {
        summary = ingest::convert_tum(input, output);
      } else if (format == "icl-nuim") {
        ingest::IclNuimOptions opts;
        if (!point_cloud.empty()) opts.point_cloud = point_cloud;
        summary = ingest::convert_icl_nuim(input, output, opts);
      } else {
        summary = ingest::convert_euroc(input, output);
      }
    }
    std::cout << summary.to_text();
    for (const auto& note : summary.notes) std::cerr << "note: " << note << '\n';
    return 0;
  } catch (const slambench::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
