// synth: write random instances for a file of factor specs.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qpbf/qpbf.hpp"
#include "qpbf/synth.hpp"

using namespace qpbf;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Random QPBF instances with prescribed hardness factors"};
  std::string spec_file, out_dir;
  app.add_option("--spec", spec_file, "One JSON object per line: n, cr, sr, ug, scale, seed")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::vector<FactorSpec> specs;
  try {
    std::ifstream is(spec_file);
    specs = read_spec_lines(is);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      try {
        specs[i].validate();
      } catch (const std::exception& e) {
        throw std::invalid_argument("spec " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const FactorSpec& s = specs[i];
      const Qpbf f = generate(s);
      char name[64];
      std::snprintf(name, sizeof name, "inst_%04zu.qpbf", i);
      save_qpbf((fs::path(out_dir) / name).string(), f);
      const Factors m = measure_factors(f);
      std::printf("%s  n=%d seed=%llu  cr %.4f  sr %.4f  ug %.4f\n", name, s.n,
                  static_cast<unsigned long long>(s.seed), m.cr, m.sr, m.ug);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
