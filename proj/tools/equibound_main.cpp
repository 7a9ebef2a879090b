// Command-line front end: validate confusion matrices, compute equivocation
// bounds, emit the achieving channel, stress-test the bound against random
// channels, tabulate the worked example family, and run the sample-based
// estimation pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 invalid or unprocessable input,
// 3 bound violation found by oracle-check, 4 I/O or parse failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "equibound/equibound.hpp"

namespace {

using namespace equibound;

std::vector<int> parse_n_list(const std::string& spec) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string token =
        spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (token.empty()) throw std::invalid_argument("--n-list has an empty entry");
    const std::size_t dots = token.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoi(token));
      } else {
        const int a = std::stoi(token.substr(0, dots));
        const int b = std::stoi(token.substr(dots + 2));
        if (a > b) throw std::invalid_argument("--n-list range \"" + token + "\" is reversed");
        for (int n = a; n <= b; ++n) out.push_back(n);
      }
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("cannot parse --n-list entry \"" + token + "\"");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("--n-list entry \"" + token + "\" is out of range");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("--n-list is empty");
  return out;
}

std::string g12(double v) { return detail::format_g(v); }

int run_validate(const std::string& path, bool header) {
  const Matrix raw = read_confusion_csv_file(path, header);
  const ConfusionMatrix cm = validate_confusion(raw);
  double total = 0.0;
  for (const auto& row : cm.joint) {
    for (double v : row) total += v;
  }
  std::cout << "ok: " << cm.n << "x" << cm.n << " joint matrix\n";
  std::cout << "ok: all entries nonnegative\n";
  std::cout << "ok: total probability " << g12(total) << " (|total - 1| <= 1e-09)\n";
  std::cout << "ok: diagonal dominates every column (MAP-consistent)\n";
  std::cout << "valid\n";
  return 0;
}

int run_bound(const std::string& path, bool header, bool as_json) {
  const ConfusionMatrix cm = validate_confusion(read_confusion_csv_file(path, header));
  const BoundReport r = bound_report(cm);
  if (as_json) {
    std::cout << to_json(r, cm.n);
    return 0;
  }
  const DecodeProfile prof = decode_profile(cm);
  std::cout << "signals:             " << cm.n << "\n";
  std::cout << "H(X):                " << g12(r.h_x) << "\n";
  std::cout << "H(X|Xhat):           " << g12(r.h_x_given_xhat) << "\n";
  std::cout << "I(X;Xhat):           " << g12(r.i_x_xhat) << "\n";
  std::cout << "bound (per-decode):  " << g12(r.bound_confusion) << "\n";
  std::cout << "bound (single-rate): " << g12(r.bound_kovalevsky) << "\n";
  std::cout << "overall error rate:  " << g12(r.overall_eps) << "\n";
  std::cout << "MI upper bound:      " << g12(r.mi_upper) << "\n";
  std::cout << "per-decode profile (1-based):\n";
  std::printf("  %-6s %-15s %-15s %-15s\n", "xhat", "p_hat", "eps", "phi_star");
  for (int xh = 0; xh < cm.n; ++xh) {
    if (prof.zero_mass[xh]) {
      std::printf("  %-6d %-15s %-15s %-15s\n", xh + 1, "0", "-", "-");
    } else {
      std::printf("  %-6d %-15s %-15s %-15s\n", xh + 1, g12(prof.p_hat[xh]).c_str(),
                  g12(prof.eps[xh]).c_str(), g12(phi_star(prof.eps[xh])).c_str());
    }
  }
  return 0;
}

int run_construct(const std::string& path, bool header, const std::string& out_path) {
  const ConfusionMatrix cm = validate_confusion(read_confusion_csv_file(path, header));
  const AchievingChannel ch = build_achieving_channel(cm);
  const double bound = equivocation_bound(cm);
  const double achieved = channel_equivocation(ch);
  const ConfusionMatrix back = induced_confusion(ch);
  double max_dev = 0.0;
  for (int x = 0; x < cm.n; ++x) {
    for (int xh = 0; xh < cm.n; ++xh) {
      max_dev = std::fmax(max_dev, std::fabs(back.joint[x][xh] - cm.joint[x][xh]));
    }
  }
  std::size_t columns = 0;
  for (const auto& f : ch.fibers) columns += f.columns.size();

  if (out_path.empty()) {
    std::cout << to_json(ch);
    return 0;
  }
  write_file_atomic(out_path, to_json(ch));
  std::cout << "per-decode bound:      " << g12(bound) << "\n";
  std::cout << "achieved equivocation: " << g12(achieved) << "\n";
  std::cout << "|achieved - bound|:    " << g12(std::fabs(achieved - bound)) << "\n";
  std::cout << "confusion round-trip:  max deviation " << g12(max_dev) << "\n";
  std::cout << "channel outputs:       " << columns << "\n";
  std::cout << "wrote: " << out_path << "\n";
  return 0;
}

int run_oracle_check(std::uint64_t trials, int nx_max, int ny_max, std::uint64_t seed,
                     const std::string& out_path) {
  const StressReport report = bound_stress_test(trials, nx_max, ny_max, seed);
  const std::string json = to_json(report);
  if (out_path.empty()) {
    std::cout << json;
  } else {
    write_file_atomic(out_path, json);
    std::cout << "trials:    " << report.trials << "\n";
    std::cout << "min slack: " << g12(report.min_slack) << "\n";
    std::cout << "wrote: " << out_path << "\n";
  }
  if (!report.violations.empty()) {
    std::cerr << "error: " << report.violations.size()
              << " bound violation(s); replay with the per-trial seeds in the report\n";
    return 3;
  }
  return 0;
}

int run_example(const std::string& n_list, const std::string& out_path) {
  const std::vector<ExperimentRow> rows = family_bound_table(parse_n_list(n_list));
  const std::string csv = to_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(out_path, csv);
    std::cout << "wrote: " << out_path << " (" << rows.size() << " rows)\n";
  }
  return 0;
}

int run_estimate(const std::string& path, const std::string& format,
                 const std::string& dump_path) {
  SampleFormat fmt = SampleFormat::Auto;
  if (format == "csv") {
    fmt = SampleFormat::Csv;
  } else if (format == "jsonl") {
    fmt = SampleFormat::JsonLines;
  } else if (format != "auto") {
    throw std::invalid_argument("--format must be auto, csv or jsonl");
  }
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  const SampleBatch batch = ingest_samples(in, fmt);
  const EstimationReport report = estimate(batch);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (!dump_path.empty()) {
    write_file_atomic(dump_path, confusion_to_csv(empirical_confusion(batch).joint));
  }
  std::cout << to_json(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivocation bounds, achieving channels and mutual-information "
               "estimates from MAP confusion matrices"};
  app.require_subcommand(1);
  app.footer(
      "File formats:\n"
      "  confusion CSV   square joint matrix p(x, xhat), one row per true signal,\n"
      "                  comma-separated; nonnegative, sums to 1 within 1e-9, and\n"
      "                  each column's diagonal entry is a column maximum\n"
      "  channel JSON    {\"p_hat\": [...], \"fibers\": [{\"xhat\", \"columns\"}]}\n"
      "  samples         CSV with an exact \"x,y\" header, or JSON Lines objects\n"
      "                  with string fields \"x\" and \"y\"\n"
      "Human-readable tables label signals 1-based; JSON output is 0-based.\n"
      "Exit codes: 0 ok, 1 usage, 2 invalid matrix, 3 bound violation, 4 I/O.");

  std::string confusion_path;
  std::string out_path;
  std::string samples_path;
  std::string dump_path;
  std::string n_list;
  std::string format = "auto";
  bool header = false;
  bool as_json = false;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 42;
  int nx_max = 5;
  int ny_max = 40;

  auto* validate = app.add_subcommand("validate", "Check a confusion-matrix CSV");
  validate->add_option("--confusion", confusion_path, "joint matrix CSV, rows = true signal")
      ->required();
  validate->add_flag("--header", header, "skip the first CSV line");

  auto* bound = app.add_subcommand("bound", "Equivocation bounds for a confusion matrix");
  bound->add_option("--confusion", confusion_path, "joint matrix CSV")->required();
  bound->add_flag("--header", header, "skip the first CSV line");
  bound->add_flag("--json", as_json, "machine-readable report on stdout");

  auto* construct =
      app.add_subcommand("construct", "Build the channel attaining the per-decode bound");
  construct->add_option("--confusion", confusion_path, "joint matrix CSV")->required();
  construct->add_flag("--header", header, "skip the first CSV line");
  construct->add_option("--out", out_path, "channel JSON path (omit to print JSON)");

  auto* oracle =
      app.add_subcommand("oracle-check", "Stress-test the bound against random channels");
  oracle->add_option("--trials", trials, "number of random channels (default 10000)");
  oracle->add_option("--nx-max,--nx", nx_max, "largest signal alphabet (default 5)");
  oracle->add_option("--ny-max,--ny", ny_max, "largest output alphabet (default 40)");
  oracle->add_option("--seed", seed, "master seed (default 42)");
  oracle->add_option("--out", out_path, "report JSON path (omit to print JSON)");

  auto* example = app.add_subcommand("example", "Tabulate the worked family of matrices");
  example->add_option("--n-list", n_list, "sizes, e.g. \"5\", \"2,3,8\" or \"2..30\"")->required();
  example->add_option("--out", out_path, "CSV path (omit to print)");

  auto* estimate_cmd =
      app.add_subcommand("estimate", "Mutual-information sandwich from (x, y) samples");
  estimate_cmd->add_option("--samples", samples_path, "sample records, CSV (x,y header) or JSONL")
      ->required();
  estimate_cmd->add_option("--format", format, "auto | csv | jsonl (default auto)");
  estimate_cmd->add_option("--dump-confusion", dump_path, "write the plug-in confusion CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(validate)) return run_validate(confusion_path, header);
    if (app.got_subcommand(bound)) return run_bound(confusion_path, header, as_json);
    if (app.got_subcommand(construct)) return run_construct(confusion_path, header, out_path);
    if (app.got_subcommand(oracle)) return run_oracle_check(trials, nx_max, ny_max, seed, out_path);
    if (app.got_subcommand(example)) return run_example(n_list, out_path);
    if (app.got_subcommand(estimate_cmd)) return run_estimate(samples_path, format, dump_path);
  } catch (const validation_error& e) {
    for (const auto& v : e.violations()) std::cerr << "error: " << v.message << "\n";
    return 2;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const empty_input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
