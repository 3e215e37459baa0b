#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hornpoc/derive.hpp"

namespace hornpoc {

enum class InputMode { ExtHornType };
enum class OutputMode { AttackDump, Poc };

struct CliConfig {
  std::filesystem::path input_path;
  std::optional<InputMode> input_mode;  // inferred from the extension when unset
  OutputMode output_mode = OutputMode::AttackDump;
  std::optional<std::filesystem::path> output_path;  // directory
  SearchBudget budget;
  bool fail_on_no_attack = false;
  bool parallel_queries = false;
  bool color = true;
};

/// 0: every query handled, 1: --fail-on-no-attack and some query had no
/// attack, 2: usage, I/O, parse or template errors.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parses flags (single-dash `-in`, `-out` accepted) and calls run().
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hornpoc
