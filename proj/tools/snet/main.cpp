#include <exception>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"snet: SimpleNet anomaly detection head (train, infer, eval, bench, gradcheck, synth)"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  snet::Action action;
  snet::register_commands(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? snet::kExitOk : snet::kExitUsage;
  }

  try {
    return action();
  } catch (const simplenet::Error& e) {
    std::cerr << "snet: " << e.what() << "\n";
    return snet::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "snet: internal error: " << e.what() << "\n";
    return snet::kExitInternal;
  }
}
