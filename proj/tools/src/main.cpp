#include <iostream>

#include "commands.hpp"
#include "spg/corrupt.hpp"
#include "spg/error.hpp"

int main(int argc, char** argv) {
  using namespace spg::cli;
  CLI::App app{"Residuals-based subgraph detection toolkit"};
  app.set_version_flag("--version", std::string(SPG_VERSION));
  app.require_subcommand(1);
  GlobalOptions global;
  std::function<int()> run;
  register_commands(app, global, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    return run ? run() : kFailure;
  } catch (const spg::ConvergenceError& e) {
    std::cerr << "spg: not converged: " << e.what() << "\n";
    return kNotConverged;
  } catch (const spg::ConfigError& e) {
    std::cerr << "spg: config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const spg::ParseError& e) {
    std::cerr << "spg: parse error: " << e.what() << "\n";
    return kConfigError;
  } catch (const spg::CalibrationError& e) {
    std::cerr << "spg: calibration failed: " << e.what() << "\n";
    return kConfigError;
  } catch (const spg::DimensionError& e) {
    std::cerr << "spg: dimension error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "spg: " << e.what() << "\n";
    return kFailure;
  }
}
