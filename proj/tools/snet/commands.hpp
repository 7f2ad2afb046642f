#pragma once

#include <functional>

#include <CLI11.hpp>

#include "simplenet/error.hpp"

namespace snet {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

int exit_code_for(simplenet::ErrorCode code);

using Action = std::function<int()>;

/// Adds every subcommand to `app`. After parsing, `action` runs the selected one.
void register_commands(CLI::App& app, Action& action);

}  // namespace snet
