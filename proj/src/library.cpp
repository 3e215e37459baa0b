#include "hornpoc/library.hpp"

#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

#ifndef HORNPOC_MODELS_DIR
#define HORNPOC_MODELS_DIR "models"
#endif

namespace hornpoc {

namespace {

ExpectedOutcome attack(std::string q, std::size_t steps, std::vector<std::string> clauses) {
  return {std::move(q), true, steps, std::move(clauses)};
}

LibraryEntry entry(std::string name, std::string stem, std::vector<ExpectedOutcome> exp) {
  return {std::move(name), stem + ".exthorntype", stem + ".scenario", std::move(exp)};
}

std::vector<LibraryEntry> build_registry() {
  std::vector<LibraryEntry> r;
  r.push_back(entry("running-example", "running_example",
                    {attack("iknows(key1[])", 3, {"put wrapkey", "export wrapped", "decrypt wrap"})}));
  r.push_back(entry("pkcs11-exp1", "pkcs11-exp1", {attack("iknows(key1[])", 2, {"wrap", "decrypt"})}));
  r.push_back(
      entry("pkcs11-exp2", "pkcs11-exp2", {attack("iknows(key1[])", 4, {"generate", "wrap", "decrypt"})}));
  // Scaling entries: same attack shape as exp1 with more stored keys.
  for (int i = 3; i <= 5; ++i) {
    std::string n = "pkcs11-exp" + std::to_string(i);
    r.push_back(entry(n, n, {attack("iknows(key1[])", 2, {"wrap", "decrypt"})}));
  }
  const std::vector<std::string> wrap_open = {"export wrapped", "open wrap"};
  const std::vector<std::string> crafted = {"craft wrap", "import wrapped", "export wrapped", "open wrap"};
  r.push_back(entry("yubihsm2-exp1", "yubihsm2-exp1", {attack("iknows(key2[])", 2, wrap_open)}));
  r.push_back(entry("yubihsm2-exp2", "yubihsm2-exp2", {attack("iknows(key2[])", 2, wrap_open)}));
  r.push_back(entry("yubihsm2-exp3", "yubihsm2-exp3", {attack("iknows(key2[])", 6, crafted)}));
  r.push_back(entry("yubihsm2-exp4", "yubihsm2-exp4", {attack("iknows(key2[])", 2, wrap_open)}));
  r.push_back(entry("yubihsm2-exp5", "yubihsm2-exp5", {attack("iknows(key2[])", 6, crafted)}));
  r.push_back(entry("yubihsm2-exp6", "yubihsm2-exp6",
                    {attack("iknows(key2[])", 3, {"put wrapkey", "export wrapped", "open wrap"})}));
  r.push_back(entry("yubihsm2-exp7", "yubihsm2-exp7", {attack("iknows(key2[])", 2, wrap_open)}));
  return r;
}

}  // namespace

const ScenarioKey* Scenario::find(int id, bool want_stored) const {
  for (const auto& k : keys) {
    if (k.id == id && k.stored == want_stored) return &k;
  }
  return nullptr;
}

std::filesystem::path LibraryEntry::model_path() const { return models_dir() / model_file; }
std::filesystem::path LibraryEntry::scenario_path() const { return models_dir() / scenario_file; }

const std::vector<LibraryEntry>& list_entries() {
  static const std::vector<LibraryEntry> registry = build_registry();
  return registry;
}

const LibraryEntry* find_entry(std::string_view name) {
  for (const auto& e : list_entries()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::filesystem::path models_dir() {
  if (const char* env = std::getenv("HORNPOC_MODELS_DIR"); env && *env) return env;
  return HORNPOC_MODELS_DIR;
}

std::optional<Scenario> parse_scenario(std::string_view text, const std::string& file,
                                       std::vector<Diagnostic>& diags) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool ok = true;
  auto fail = [&](const std::string& msg) {
    diags.push_back({Severity::Error, "scenario", msg, {file, lineno, 1, 0}});
    ok = false;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string tok; ls >> tok;) w.push_back(tok);
    if (w.empty()) continue;
    auto number = [&](const std::string& t, int& out) {
      try {
        std::size_t used = 0;
        out = std::stoi(t, &used);
        if (used == t.size()) return true;
      } catch (const std::exception&) {
      }
      fail("expected an integer, got '" + t + "'");
      return false;
    };
    if (w[0] == "mode" && w.size() == 2) {
      if (w[1] != "pkcs11" && w[1] != "yubihsm2") fail("unknown mode '" + w[1] + "'");
      s.mode = w[1];
    } else if (w[0] == "session" && w.size() == 2) {
      int id = 0;
      if (number(w[1], id)) s.session = id;
    } else if ((w[0] == "key" && w.size() == 5) || (w[0] == "known" && w.size() == 4)) {
      ScenarioKey k;
      k.stored = w[0] == "key";
      k.type = w[2];
      if (!number(w[1], k.id) || !number(w[3], k.seed)) continue;
      if (k.stored && w[4] != "-") {
        std::istringstream fs(w[4]);
        for (std::string f; std::getline(fs, f, ',');) {
          if (!f.empty()) k.flags.push_back(f);
        }
      }
      if (s.find(k.id, k.stored)) fail("duplicate entry for key " + std::to_string(k.id));
      s.keys.push_back(std::move(k));
    } else {
      fail("unrecognized line '" + line + "'");
    }
  }
  if (ok && s.mode.empty()) {
    lineno = 0;
    fail("missing mode line");
  }
  if (ok && s.session && !s.find(*s.session, true)) {
    fail("session key " + std::to_string(*s.session) + " is not stored");
  }
  if (!ok) return std::nullopt;
  return s;
}

std::vector<std::string> scenario_mismatches(const Model& m, const Scenario& s) {
  std::vector<std::string> literals;
  if (m.header) literals.push_back(*m.header);
  if (m.footer) literals.push_back(*m.footer);
  std::set<int> stored_ids;
  for (const auto& c : m.clauses) {
    if (!c.annotation) continue;
    for (const auto& seg : c.annotation->segments) {
      if (auto t = std::get_if<std::string>(&seg)) literals.push_back(*t);
    }
  }
  static const std::regex integer(R"(\s*(\d+)\s*)");
  for (const auto& f : m.functions) {
    if (!f.annotation) continue;
    for (const auto& seg : f.annotation->segments) {
      if (auto t = std::get_if<std::string>(&seg)) literals.push_back(*t);
    }
    // Bare integer constants name device key ids.
    std::smatch mt;
    if (f.param_types.empty() && f.result_type.id == "id" && f.annotation->segments.size() == 1) {
      if (auto t = std::get_if<std::string>(&f.annotation->segments[0]); t && std::regex_match(*t, mt, integer)) {
        stored_ids.insert(std::stoi(mt[1]));
      }
    }
  }
  std::set<int> known_ids;
  static const std::regex handle(R"(token\.handle\((\d+)\))");
  static const std::regex known(R"(token\.known_value\((\d+)\))");
  for (const auto& text : literals) {
    for (std::sregex_iterator it(text.begin(), text.end(), handle), end; it != end; ++it) {
      stored_ids.insert(std::stoi((*it)[1]));
    }
    for (std::sregex_iterator it(text.begin(), text.end(), known), end; it != end; ++it) {
      known_ids.insert(std::stoi((*it)[1]));
    }
  }
  std::vector<std::string> out;
  for (int id : stored_ids) {
    if (!s.find(id, true)) out.push_back("key " + std::to_string(id) + " is used by the model but not stored");
  }
  for (int id : known_ids) {
    if (!s.find(id, false)) out.push_back("key " + std::to_string(id) + " is known in the model but not in the scenario");
  }
  return out;
}

}  // namespace hornpoc
