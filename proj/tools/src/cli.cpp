#include "mnar_cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mnar/mnar.hpp"

namespace mnar::cli {

namespace {

struct Config {
  std::string input;
  std::string model;
  std::string output;
  std::string format = "json";
  std::string params;
  std::string keep;
  std::uint64_t seed = 0;
  double n = 0.0;
  double tol = 1e-10;
  int max_iter = 10000;
};

void emit(const Config& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) throw Error("cannot write '" + cfg.output + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FitOptions fit_options(const Config& cfg) {
  FitOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return o;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int cmd_fit(const Config& cfg, bool expected_only, std::ostream& out, std::ostream& err) {
  const auto table = load_table(cfg.input);
  print_warnings(table.warnings(), err);
  const auto spec = parse_spec(cfg.model, table);
  const auto f = fit(table, spec, fit_options(cfg));
  print_warnings(f.warnings, err);
  const bool text = cfg.format == "text";
  if (expected_only) {
    emit(cfg, text ? expected_table_text(table, f) : expected_table_json(table, f), out);
  } else {
    const auto gof = g_squared(table, f);
    emit(cfg, text ? fit_report_text(table, f, gof) : fit_report_json(table, f, gof), out);
  }
  return f.is_boundary() ? 2 : 0;
}

int cmd_compare(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto table = load_table(cfg.input);
  print_warnings(table.warnings(), err);
  const auto report = compare_models(table, fit_options(cfg));
  emit(cfg, cfg.format == "text" ? comparison_text(report) : comparison_json(report), out);
  return 0;
}

int cmd_subtable(const Config& cfg, std::ostream& out) {
  const auto table = load_table(cfg.input);
  std::vector<std::string> keep;
  std::stringstream ss(cfg.keep);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) keep.push_back(item);
  emit(cfg, serialize_table(extract_subtable(table, keep)), out);
  return 0;
}

int cmd_simulate(const Config& cfg, std::ostream& out) {
  if (!(cfg.n > 0.0)) throw ValidationError("--n must be positive");
  const auto model = parse_simulation_model(read_file(cfg.params));
  emit(cfg, serialize_table(simulate_table(model, cfg.n, cfg.seed)), out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit missing-data mechanism models to incomplete contingency tables", "mnarfit"};
  app.require_subcommand(1);
  Config cfg;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--output", cfg.output, "Write the result to PATH instead of stdout");
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"json", "text"}));
  };
  auto add_tuning = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "Relative log-likelihood tolerance for iterative fits")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cfg.max_iter, "Iteration limit for iterative fits")
        ->check(CLI::NonNegativeNumber);
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit one model and report parameters and G2");
  fit_cmd->add_option("--input", cfg.input, "Table document (JSON or CSV)")->required();
  fit_cmd->add_option("--model", cfg.model, "Model, e.g. \"Y1:Y2,Y2:self\"")->required();
  add_format(fit_cmd);
  add_tuning(fit_cmd);

  auto* cmp_cmd = app.add_subcommand("compare", "Fit every model and rank them by G2");
  cmp_cmd->add_option("--input", cfg.input, "Table document (JSON or CSV)")->required();
  add_format(cmp_cmd);
  add_tuning(cmp_cmd);

  auto* exp_cmd = app.add_subcommand("expected", "Export the fitted expected table");
  exp_cmd->add_option("--input", cfg.input, "Table document (JSON or CSV)")->required();
  exp_cmd->add_option("--model", cfg.model, "Model, e.g. \"Y1:Y3\"")->required();
  add_format(exp_cmd);
  add_tuning(exp_cmd);

  auto* sub_cmd = app.add_subcommand("subtable", "Keep a subset of the missing-capable variables");
  sub_cmd->add_option("--input", cfg.input, "Table document (JSON or CSV)")->required();
  sub_cmd->add_option("--keep", cfg.keep, "Comma-separated variables to keep")->required();
  sub_cmd->add_option("--output", cfg.output, "Write the result to PATH instead of stdout");

  auto* sim_cmd = app.add_subcommand("simulate", "Draw a Poisson table from a parametrized model");
  sim_cmd->add_option("--params", cfg.params, "Parameter document")->required();
  sim_cmd->add_option("--n", cfg.n, "Expected grand total")->required();
  sim_cmd->add_option("--seed", cfg.seed, "Random seed");
  sim_cmd->add_option("--output", cfg.output, "Write the result to PATH instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(cfg, false, out, err);
    if (exp_cmd->parsed()) return cmd_fit(cfg, true, out, err);
    if (cmp_cmd->parsed()) return cmd_compare(cfg, out, err);
    if (sub_cmd->parsed()) return cmd_subtable(cfg, out);
    if (sim_cmd->parsed()) return cmd_simulate(cfg, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mnar::cli
