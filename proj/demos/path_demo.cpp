// Plans a path through each corridor variant with 10 and with 45 obstacle
// readings and writes one report per run, ready for plotting.
//
//   path_demo [output-dir]

#include <cstdio>
#include <filesystem>

#include "sfga/sfga.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("path_demo_out");
  try {
    for (int variant = 1; variant <= 4; ++variant) {
      for (std::size_t readings : {10u, 45u}) {
        const sfga::ExperimentScenario s = sfga::gen_path_scenario(variant, readings, 1);
        const sfga::ExperimentReport r = sfga::run_experiment(s);
        const auto& obj = r.trajectory->objective;
        const fs::path out = dir / ("variant" + std::to_string(variant) + "_n" + std::to_string(readings) + ".json");
        sfga::write_atomic(out, sfga::dump(sfga::to_json(r)));
        std::printf("variant %d, n=%2zu: arc %.3f, clearance %.3f, corridor gamma %.3f -> %s\n", variant, readings,
                    obj.arc_length, obj.obstacle_distance, obj.corridor_gamma, out.string().c_str());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "path_demo: %s\n", e.what());
    return 1;
  }
  return 0;
}
