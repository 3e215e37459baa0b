#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hornpoc/diagnostic.hpp"
#include "hornpoc/model.hpp"

namespace hornpoc {

struct ExpectedOutcome {
  std::string query;  // model syntax, ground
  bool attack = true;
  std::optional<std::size_t> annotated_steps;
  std::vector<std::string> required_clauses;  // labels that must occur in the derivation
};

struct ScenarioKey {
  int id = 0;
  std::string type;
  int seed = 0;
  std::vector<std::string> flags;
  bool stored = true;  // false for `known` lines: value given to the attacker only
};

/// Initial store of the mock token. Text format, one entry per line:
///   mode pkcs11|yubihsm2
///   session <auth key id>            (yubihsm2)
///   key <id> <type> <seed> <flags>   flags comma-separated or `-`
///   known <id> <type> <seed>
/// `#` starts a comment.
struct Scenario {
  std::string mode;
  std::optional<int> session;
  std::vector<ScenarioKey> keys;

  const ScenarioKey* find(int id, bool stored) const;
};

struct LibraryEntry {
  std::string name;
  std::string model_file;  // relative to models_dir()
  std::string scenario_file;
  std::vector<ExpectedOutcome> expected;

  std::filesystem::path model_path() const;
  std::filesystem::path scenario_path() const;
};

const std::vector<LibraryEntry>& list_entries();
const LibraryEntry* find_entry(std::string_view name);

/// HORNPOC_MODELS_DIR from the environment if set, else the build-time path.
std::filesystem::path models_dir();

std::optional<Scenario> parse_scenario(std::string_view text, const std::string& file,
                                       std::vector<Diagnostic>& diags);

/// Handles, key ids and known values that the model's templates refer to but
/// the scenario does not provide. Empty means they line up.
std::vector<std::string> scenario_mismatches(const Model& m, const Scenario& s);

}  // namespace hornpoc
