// evocounsel command-line entry point.
//
// Exit codes: 0 success, 1 runtime abort (checkpoint written), 2 invalid
// input (config, arguments, files).

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/run/backends.hpp"
#include "evocounsel/run/config.hpp"
#include "evocounsel/run/report.hpp"
#include "evocounsel/run/runner.hpp"
#include "evocounsel/run/service.hpp"
#include "evocounsel/run/store.hpp"
#include "evocounsel/skills/diff.hpp"

namespace fs = std::filesystem;
using namespace evocounsel;

namespace {

constexpr int kOk = 0;
constexpr int kAbort = 1;
constexpr int kInvalid = 2;

void print_issues(const ValidationError& e) {
  std::cerr << "invalid configuration:\n";
  for (const auto& i : e.issues()) std::cerr << "  " << i << "\n";
}

int finish_run(run::Runner& runner) {
  try {
    runner.run_to_end();
  } catch (const RunAbort& e) {
    std::cerr << "run aborted at session " << e.session_index() << ": " << e.what() << "\n"
              << "checkpoint: " << (runner.store().dir() / "checkpoint.json").string() << "\n";
    return kAbort;
  }
  const auto& r = runner.engine().run();
  std::cout << "run " << r.run_id << ": " << r.completed() << " session(s) -> " << runner.store().dir().string()
            << "\n";
  return kOk;
}

int cmd_run(const std::string& config_path, const std::string& scripted, const std::string& out,
            const std::string& resume_dir) {
  if (!resume_dir.empty()) {
    fs::path dir = resume_dir;
    if (dir.filename() == "checkpoint.json") dir = dir.parent_path();
    auto runner = run::Runner::resume(dir, scripted.empty() ? std::nullopt : std::optional<fs::path>(scripted));
    std::cout << "resuming " << runner->engine().run().run_id << " at session " << runner->engine().next_session()
              << "\n";
    return finish_run(*runner);
  }
  if (config_path.empty()) {
    std::cerr << "run: --config is required (or --resume)\n";
    return kInvalid;
  }
  auto config = run::load_config(config_path);
  if (!scripted.empty()) apply_scripted_dir(config, scripted);
  if (auto issues = config.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  auto runner = run::Runner::create(config, out);
  return finish_run(*runner);
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<nlohmann::json> reports;
  for (const auto& d : dirs) {
    run::RunStore store(d);
    const auto config = store.read_config();
    const auto rubric = run::load_rubric(config);
    const auto lr = store.load_run();
    auto report = run::build_report(lr, rubric);
    files::write_json(store.dir() / "report.json", report);
    const auto traj = run::trajectory_from_run(lr, rubric);
    files::write_text(store.dir() / "trajectory.csv", traj.to_csv());
    files::write_json(store.dir() / "trajectory.json", traj.to_json());
    reports.push_back(std::move(report));
  }
  const nlohmann::json result = reports.size() == 1 ? reports.front() : run::compare_reports(reports);
  if (out.empty()) std::cout << result.dump(2) << "\n";
  else files::write_json(out, result);
  return kOk;
}

int cmd_tree_diff(const std::string& a, const std::string& b, bool as_json) {
  const auto ta = skills::load_tree(a);
  const auto tb = skills::load_tree(b);
  const auto diff = skills::diff_report(ta, tb);
  if (as_json) std::cout << skills::to_json(diff).dump(2) << "\n";
  else std::cout << skills::render_text(diff, tb);
  return kOk;
}

int cmd_validate(const std::string& path, const std::string& scripted) {
  auto config = run::load_config(path);
  if (!scripted.empty()) apply_scripted_dir(config, scripted);
  if (auto issues = config.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  // resolve the referenced inputs too, so a bad card or tree is reported here
  run::select_card(config);
  run::load_rubric(config);
  run::load_seed_tree(config);
  std::cout << "ok: " << config.effective_run_id() << " digest " << config.digest() << "\n";
  return kOk;
}

run::Service* g_service = nullptr;

int cmd_serve(const std::string& host, int port, const std::string& runs_root, const std::vector<std::string>& run_dirs,
              const std::string& live_config, const std::string& scripted) {
  run::ServiceOptions opt;
  opt.host = host;
  opt.port = port;
  opt.runs_root = runs_root;
  for (const auto& d : run_dirs) opt.run_dirs.emplace_back(d);
  if (!live_config.empty()) {
    auto config = run::load_config(live_config);
    if (!scripted.empty()) apply_scripted_dir(config, scripted);
    opt.live = std::move(config);
  }
  run::Service service(std::move(opt));
  const int bound = service.start();
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  service.wait();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evocounsel: lifelong counseling-agent runs, datasets and reports"};
  app.require_subcommand(1);

  std::string config_path, scripted, out, resume_dir;
  auto* run_cmd = app.add_subcommand("run", "Execute a run from a config file");
  run_cmd->add_option("--config", config_path, "Run config JSON");
  run_cmd->add_option("--scripted", scripted, "Directory with counselor/client/judge/extractor.json scripts");
  run_cmd->add_option("--out", out, "Run directory (default: config output_dir or runs/<run_id>)");
  run_cmd->add_option("--resume", resume_dir, "Continue the run in this directory (or its checkpoint.json)");

  std::string resume_pos;
  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from its checkpoint");
  resume_cmd->add_option("run_dir", resume_pos, "Run directory")->required();
  resume_cmd->add_option("--scripted", scripted, "Scripted backend directory");

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Write report.json and trajectories; compare several runs");
  report_cmd->add_option("run_dirs", report_dirs, "Run directories")->required();
  report_cmd->add_option("--out", report_out, "Write the (comparison) report here instead of stdout");

  std::string host = "127.0.0.1", runs_root, live_config;
  int port = 8080;
  std::vector<std::string> serve_runs;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions and run state over HTTP");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");
  serve_cmd->add_option("--runs-root", runs_root, "Directory holding run directories");
  serve_cmd->add_option("--run", serve_runs, "Extra run directory to serve");
  serve_cmd->add_option("--config", live_config, "Config for live sessions");
  serve_cmd->add_option("--scripted", scripted, "Scripted backend directory for live sessions");

  std::string tree_a, tree_b;
  bool diff_json = false;
  auto* diff_cmd = app.add_subcommand("tree-diff", "Appended and merged skills between two tree versions");
  diff_cmd->add_option("a", tree_a, "Older tree JSON")->required();
  diff_cmd->add_option("b", tree_b, "Newer tree JSON")->required();
  diff_cmd->add_flag("--json", diff_json, "JSON output");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate-config", "Check a config and the files it references");
  validate_cmd->add_option("config", validate_path, "Run config JSON")->required();
  validate_cmd->add_option("--scripted", scripted, "Scripted backend directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, scripted, out, resume_dir);
    if (*resume_cmd) return cmd_run("", scripted, "", resume_pos);
    if (*report_cmd) return cmd_report(report_dirs, report_out);
    if (*serve_cmd) return cmd_serve(host, port, runs_root, serve_runs, live_config, scripted);
    if (*diff_cmd) return cmd_tree_diff(tree_a, tree_b, diff_json);
    if (*validate_cmd) return cmd_validate(validate_path, scripted);
  } catch (const ValidationError& e) {
    print_issues(e);
    return kInvalid;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const RunAbort& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAbort;
  }
  return kInvalid;
}
