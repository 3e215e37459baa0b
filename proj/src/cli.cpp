#include "hornpoc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <system_error>

#include "CLI11.hpp"
#include "hornpoc/codegen.hpp"
#include "hornpoc/parser.hpp"

namespace hornpoc {

namespace {

bool read_file(const std::filesystem::path& p, std::string& out) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return false;
  out = ss.str();
  return true;
}

// Temp file in the same directory, then rename.
bool write_atomic(const std::filesystem::path& p, const std::string& data, std::string& error) {
  std::filesystem::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    o << data;
    o.close();
    if (!o) {
      error = "cannot write " + tmp.string();
      return false;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    error = "cannot rename to " + p.string();
    return false;
  }
  return true;
}

std::string bound_text(const DeriveResult& r, const SearchBudget& b) {
  if (r.status == DeriveStatus::BudgetExhausted) return r.exhausted;
  return "depth " + std::to_string(b.max_depth);
}

}  // namespace

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  if (!config.input_mode && config.input_path.extension() != ".exthorntype") {
    err << "error: cannot infer input mode of " << config.input_path.string() << "; pass -in exthorntype\n";
    return 2;
  }
  if (config.output_mode == OutputMode::Poc && !config.output_path) {
    err << "error: -out poc needs an output directory (-o)\n";
    return 2;
  }
  std::string source;
  if (!read_file(config.input_path, source)) {
    err << config.input_path.string() << ": error: cannot read file\n";
    return 2;
  }
  ParseResult parsed = parse_model(source, config.input_path.string());
  for (const auto& d : parsed.diagnostics) err << format_diagnostic(d, config.color) << "\n";
  if (!parsed.ok()) return 2;
  const Model& m = *parsed.model;

  if (config.output_path) {
    std::error_code ec;
    std::filesystem::create_directories(*config.output_path, ec);
    if (ec) {
      err << "error: cannot create " << config.output_path->string() << "\n";
      return 2;
    }
  }

  std::vector<DeriveResult> results(m.queries.size());
  if (config.parallel_queries) {
    std::vector<std::future<DeriveResult>> jobs;
    for (const auto& q : m.queries) {
      jobs.push_back(std::async(std::launch::async, [&m, &q, &config] { return derive(m, q, config.budget); }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < m.queries.size(); ++i) results[i] = derive(m, m.queries[i], config.budget);
  }

  bool input_error = false;
  std::size_t attacks = 0;
  for (std::size_t i = 0; i < m.queries.size(); ++i) {
    const Query& q = m.queries[i];
    const DeriveResult& r = results[i];
    for (const auto& w : r.warnings) err << format_diagnostic(w, config.color) << "\n";
    if (!r.found()) {
      out << "query " << to_string(q.fact) << ": NO ATTACK (bound " << bound_text(r, config.budget) << ")\n";
      continue;
    }
    ++attacks;
    out << "query " << to_string(q.fact) << ": ATTACK (depth " << r.tree->depth() << ", " << r.stats.nodes
        << " nodes, " << r.stats.elapsed.count() << " ms)\n";
    std::vector<Diagnostic> bad = check_tree(m, *r.tree);
    if (!bad.empty()) {
      for (const auto& d : bad) err << "internal: " << format_diagnostic(d, config.color) << "\n";
      input_error = true;
      continue;
    }
    std::string text, file;
    if (config.output_mode == OutputMode::Poc) {
      try {
        text = render(translate_tree(m, *r.tree));
      } catch (const CodegenError& e) {
        err << config.input_path.string() << ": error[codegen]: " << e.what() << "\n";
        input_error = true;
        continue;
      }
      file = poc_file_name(i, q.fact);
    } else {
      text = dump_tree(*r.tree);
      file = poc_file_name(i, q.fact, ".tree");
    }
    if (!config.output_path) {
      out << text;
      continue;
    }
    std::string io_error;
    if (!write_atomic(*config.output_path / file, text, io_error)) {
      err << "error: " << io_error << "\n";
      input_error = true;
    }
  }
  out << m.queries.size() << " queries, " << attacks << " attacks\n";
  if (input_error) return 2;
  if (config.fail_on_no_attack && attacks < m.queries.size()) return 1;
  return 0;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Derives attacks from annotated Horn-clause models and emits proof-of-concept programs",
               "hornpoc"};
  CliConfig config;
  std::string in_mode, out_mode = "attack-dump", output;
  int timeout_ms = static_cast<int>(config.budget.timeout.count());
  app.add_option("input", config.input_path, "Model file")->required();
  app.add_option("--in", in_mode, "Input mode")->check(CLI::IsMember({"exthorntype"}));
  app.add_option("--out", out_mode, "Output mode")->check(CLI::IsMember({"poc", "attack-dump"}));
  app.add_option("-o,--output", output, "Output directory");
  app.add_option("--max-depth", config.budget.max_depth, "Derivation tree depth bound")->check(CLI::PositiveNumber);
  app.add_option("--max-nodes", config.budget.max_nodes, "Search node budget")->check(CLI::PositiveNumber);
  app.add_option("--timeout-ms", timeout_ms, "Per-query time budget")->check(CLI::PositiveNumber);
  app.add_flag("--parallel-queries", config.parallel_queries, "Search queries concurrently");
  app.add_flag("--fail-on-no-attack", config.fail_on_no_attack, "Exit 1 when a query has no attack");

  // ProVerif-style single-dash long flags.
  std::vector<std::string> argv;
  for (const auto& a : args) {
    if (a == "-in") argv.push_back("--in");
    else if (a == "-out") argv.push_back("--out");
    else argv.push_back(a);
  }
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (!in_mode.empty()) config.input_mode = InputMode::ExtHornType;
  config.output_mode = out_mode == "poc" ? OutputMode::Poc : OutputMode::AttackDump;
  if (!output.empty()) config.output_path = output;
  config.budget.timeout = std::chrono::milliseconds(timeout_ms);
  if (const char* c = std::getenv("HORNPOC_COLOR")) {
    std::string v = c;
    config.color = !(v == "0" || v == "never" || v == "no" || v == "off");
  }
  return run(config, out, err);
}

}  // namespace hornpoc
