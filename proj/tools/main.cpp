#include <CLI11.hpp>

#include <iostream>

#include "hjreach/error.hpp"
#include "hjreach/parallel.hpp"
#include "hjreach_cli/commands.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kNumerical = 3;

hjreach::cli::Fixes parse_fixes(const std::vector<std::string>& raw) {
  hjreach::cli::Fixes out;
  for (const std::string& s : raw) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw hjreach::UsageError("--fix expects name=value, got '" + s + "'");
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() - eq - 1) {
      throw hjreach::UsageError("--fix value is not a number in '" + s + "'");
    }
    out.emplace_back(s.substr(0, eq), v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = hjreach::cli;
  CLI::App app{"Hamilton-Jacobi reachability for two-vehicle safety analysis"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: HJREACH_THREADS or all cores)");

  std::string scenario, out_dir;
  auto* solve = app.add_subcommand("solve", "Solve a scenario file and dump the value function");
  solve->add_option("scenario", scenario, "Scenario file")->required();
  solve->add_option("-o,--out", out_dir, "Output directory")->required();

  std::string dump_dir;
  std::vector<double> state, ub;
  double time = 0.0;
  bool as_json = false;
  auto* query = app.add_subcommand("query", "Evaluate the value function at one state");
  query->add_option("dump", dump_dir, "Dump directory")->required();
  query->add_option("--state", state, "State vector, comma separated")->required()->delimiter(',');
  query->add_option("--time", time, "Time in [-T, 0]")->required();
  query->add_option("--ub", ub, "B's control 'accel,steer' for the preserving set")->delimiter(',');
  query->add_flag("--json", as_json, "Print a JSON record");

  std::vector<std::string> fixes;
  std::string csv;
  auto* slice = app.add_subcommand("slice", "Export a 2-D slice as CSV");
  slice->add_option("dump", dump_dir, "Dump directory")->required();
  slice->add_option("--time", time, "Time in [-T, 0]")->required();
  slice->add_option("--fix", fixes, "Fixed dimension name=value (repeatable)");
  slice->add_option("-o,--out", csv, "CSV file")->required();

  double level = 0.0;
  auto* contour = app.add_subcommand("contour", "Export level-set polylines of a 2-D slice");
  contour->add_option("dump", dump_dir, "Dump directory")->required();
  contour->add_option("--time", time, "Time in [-T, 0]")->required();
  contour->add_option("--fix", fixes, "Fixed dimension name=value (repeatable)");
  contour->add_option("--level", level, "Contour level (default 0)");
  contour->add_option("-o,--out", csv, "CSV file")->required();

  std::string dump_b;
  auto* compare = app.add_subcommand("compare", "Compare the unsafe sets of two dumps");
  compare->add_option("dump_a", dump_dir, "First dump")->required();
  compare->add_option("dump_b", dump_b, "Second dump")->required();
  compare->add_option("--time", time, "Time in [-T, 0]")->required();

  std::string demo_name;
  cli::DemoOptions demo_opts;
  std::vector<std::size_t> counts;
  auto* demo = app.add_subcommand("demo", "Run a demonstration pipeline");
  demo->add_option("name", demo_name, "fig2a or fig2b")->required()->check(CLI::IsMember({"fig2a", "fig2b"}));
  demo->add_option("-o,--out", out_dir, "Output directory")->required();
  demo->add_option("--horizon", demo_opts.horizon_s, "Horizon in seconds");
  demo->add_option("--counts", counts, "Grid counts dx,dy,dtheta,va,vb")->delimiter(',')->expected(5);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (threads > 0) hjreach::set_thread_count(threads);
    if (*solve) {
      cli::solve_scenario(cli::load_scenario(scenario), out_dir, &std::cerr);
    } else if (*query) {
      cli::QueryRequest q{state, time, std::nullopt, as_json};
      if (!ub.empty()) {
        if (ub.size() != 2) throw hjreach::UsageError("--ub expects 'accel,steer'");
        q.ub = hjreach::AgentControl{ub[0], ub[1]};
      }
      cli::cmd_query(dump_dir, q, std::cout);
    } else if (*slice) {
      cli::cmd_slice(dump_dir, time, parse_fixes(fixes), csv);
    } else if (*contour) {
      cli::cmd_contour(dump_dir, time, parse_fixes(fixes), level, csv);
    } else if (*compare) {
      cli::cmd_compare(dump_dir, dump_b, time, std::cout);
    } else if (*demo) {
      if (!counts.empty()) std::copy(counts.begin(), counts.end(), demo_opts.counts.begin());
      const auto r = cli::run_demo(demo_name, out_dir, demo_opts, &std::cerr);
      std::cerr << "[" << demo_name << "] finished in " << r.wall_s << " s" << std::endl;
    }
  } catch (const hjreach::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const cli::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const hjreach::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const hjreach::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
