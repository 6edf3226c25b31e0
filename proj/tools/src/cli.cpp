#include "thcsim_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "thcsim/error.hpp"
#include "thcsim/metrics.hpp"
#include "thcsim/sim.hpp"

namespace thcsim::cli {

namespace fs = std::filesystem;

namespace {

bool is_builtin_id(const std::string& s) {
  return s.size() == 1 && s[0] >= '1' && s[0] <= '9';
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <typename Writer>
void write_stream(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  writer(out);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string label(const std::string& scenario) {
  if (is_builtin_id(scenario)) return scenario;
  return fs::path(scenario).stem().string();
}

// Everything one grid cell contributes to summary.csv and checks.csv.
struct CellResult {
  std::string scenario;
  std::uint64_t seed = 0;
  AblationToggles toggles;
  std::string status = "ok";
  AblationReport report;
};

bool same_cell(const AblationToggles& a, const AblationToggles& b) {
  return a.task1 == b.task1 && a.task2 == b.task2 && a.task3 == b.task3 &&
         a.controller == b.controller;
}


const CellResult* find_cell(const std::vector<CellResult>& cells, const CellResult& like,
                            bool task2, bool task3, GoalController controller) {
  AblationToggles t = like.toggles;
  t.task2 = task2;
  t.task3 = task3;
  t.controller = controller;
  for (const auto& c : cells) {
    if (c.scenario == like.scenario && c.seed == like.seed && same_cell(c.toggles, t)) return &c;
  }
  return nullptr;
}

double aux_path_sum(const AblationReport& r) {
  double sum = 0.0;
  for (std::size_t i = 1; i < r.path_length.size(); ++i) sum += r.path_length[i];
  return sum;
}

std::string summary_csv(const std::vector<CellResult>& cells) {
  std::size_t n_aux = 0;
  for (const auto& c : cells) n_aux = std::max(n_aux, c.report.distance_error.size());

  std::ostringstream out;
  out << "scenario,seed,task2,task3,controller,status,occlusion_pct";
  for (std::size_t u = 1; u <= n_aux; ++u) out << ",occlusion_pct_aux" << u;
  out << ",volume_max_m3";
  for (std::size_t u = 1; u <= n_aux; ++u) out << ",distance_max_aux" << u << ",distance_mean_aux" << u;
  out << ",path_main";
  for (std::size_t u = 1; u <= n_aux; ++u) out << ",path_aux" << u;
  out << ",path_aux_total,task3_on_pct,task3_off_pct\n";

  for (const auto& c : cells) {
    const AblationReport& r = c.report;
    const bool ok = c.status == "ok";
    auto num = [&](double v) { return ok ? fmt(v) : std::string(); };
    out << label(c.scenario) << ',' << c.seed << ',' << (c.toggles.task2 ? "on" : "off") << ','
        << (c.toggles.task3 ? "on" : "off") << ',' << to_string(c.toggles.controller) << ','
        << c.status << ',' << num(r.occlusion_time_pct);
    for (std::size_t u = 0; u < n_aux; ++u) {
      out << ',' << (u < r.occlusion_time_pct_per_aux.size() ? num(r.occlusion_time_pct_per_aux[u]) : "");
    }
    double vmax = 0.0;
    for (double v : r.intersection_volume_series) vmax = std::max(vmax, v);
    out << ',' << num(vmax);
    for (std::size_t u = 0; u < n_aux; ++u) {
      if (u < r.distance_error.size()) {
        out << ',' << num(r.distance_error[u].max) << ',' << num(r.distance_error[u].mean);
      } else {
        out << ",,";
      }
    }
    out << ',' << (r.path_length.empty() ? "" : num(r.path_length[0]));
    for (std::size_t u = 0; u < n_aux; ++u) {
      out << ',' << (u + 1 < r.path_length.size() ? num(r.path_length[u + 1]) : "");
    }
    out << ',' << num(aux_path_sum(r));
    // Table-2 style pair: the same cell with Task 3 switched on and off.
    const CellResult* on = find_cell(cells, c, c.toggles.task2, true, c.toggles.controller);
    const CellResult* off = find_cell(cells, c, c.toggles.task2, false, c.toggles.controller);
    auto pct = [](const CellResult* x) {
      return x && x->status == "ok" ? fmt(x->report.occlusion_time_pct) : std::string();
    };
    out << ',' << pct(on) << ',' << pct(off) << '\n';
  }
  return out.str();
}

// Directional checks against the full system (all tasks on, PIC).
std::string checks_csv(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << "check,scenario,seed,lhs,rhs,pass\n";
  std::map<std::pair<std::string, std::uint64_t>, bool> seen;
  for (const auto& c : cells) {
    if (!seen.emplace(std::make_pair(c.scenario, c.seed), true).second) continue;
    const CellResult* full = find_cell(cells, c, true, true, GoalController::kPic);
    const CellResult* no_los = find_cell(cells, c, true, false, GoalController::kPic);
    const CellResult* no_dist = find_cell(cells, c, false, true, GoalController::kPic);
    const CellResult* pid = find_cell(cells, c, true, true, GoalController::kPid);
    auto ok = [](const CellResult* x) { return x && x->status == "ok"; };
    auto row = [&](const std::string& name, double lhs, double rhs, bool pass) {
      out << name << ',' << label(c.scenario) << ',' << c.seed << ',' << fmt(lhs) << ','
          << fmt(rhs) << ',' << (pass ? "pass" : "fail") << '\n';
    };
    if (ok(full) && ok(no_los)) {
      const double a = full->report.occlusion_time_pct;
      const double b = no_los->report.occlusion_time_pct;
      row("occlusion_task3_on_le_off", a, b, a <= b);
    }
    if (ok(full) && ok(no_dist)) {
      const auto& on = full->report.distance_error;
      const auto& off = no_dist->report.distance_error;
      for (std::size_t u = 0; u < std::min(on.size(), off.size()); ++u) {
        row("distance_mean_task2_on_le_off_aux" + std::to_string(u + 1), on[u].mean, off[u].mean,
            on[u].mean <= off[u].mean + 1e-6);
      }
    }
    if (ok(full) && ok(pid)) {
      const double a = aux_path_sum(full->report);
      const double b = aux_path_sum(pid->report);
      row("aux_path_pic_lt_pid", a, b, a < b);
    }
  }
  return out.str();
}

}  // namespace

ScenarioConfig resolve_scenario(const std::string& scenario) {
  if (is_builtin_id(scenario)) return builtin_scenario(scenario[0] - '0');
  if (!fs::exists(scenario)) {
    throw Error(ErrorCode::kUnknownScenario,
                "'" + scenario + "' is neither a builtin id (1-5) nor a config file");
  }
  return load_config(scenario);
}

ScenarioConfig request_config(const RunRequest& req) {
  ScenarioConfig cfg = resolve_scenario(req.scenario);
  cfg.ablation.task2 = req.task2;
  cfg.ablation.task3 = req.task3;
  cfg.ablation.controller = req.controller;
  if (req.seed) cfg.seed = *req.seed;
  return cfg;
}

namespace {

int execute(const RunRequest& req, std::ostream& log, AblationReport* report_out) {
  ScenarioConfig cfg;
  try {
    cfg = request_config(req);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  const auto violations = validate_config(cfg);
  if (!violations.empty()) {
    log << "invalid config (" << violations.size() << " violations):\n";
    for (const auto& v : violations) {
      log << "  " << v.code << " at " << v.path << ": " << v.message << '\n';
    }
    return kExitBadConfig;
  }

  SimHistory history;
  try {
    history = run(cfg);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kDivergentRollouts ? kExitDivergent : kExitRunFailed;
  }
  for (const auto& w : history.warnings) log << "warning: " << w << '\n';

  try {
    fs::create_directories(req.out_dir);
    AblationReport report = make_report(history, req.volume_resolution);
    write_stream(req.out_dir / "history.csv",
                 [&](std::ostream& out) { write_history_csv(history, out); });
    write_file(req.out_dir / "report.json", report_to_json(report));
    write_stream(req.out_dir / "volume_series.csv",
                 [&](std::ostream& out) { write_volume_series_csv(history, report, out); });
    write_stream(req.out_dir / "distance_series.csv",
                 [&](std::ostream& out) { write_distance_series_csv(history, out); });
    if (report_out) *report_out = std::move(report);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRunFailed;
  }
  return kExitOk;
}

}  // namespace

int run_single(const RunRequest& req, std::ostream& log) { return execute(req, log, nullptr); }

std::vector<AblationToggles> ablation_grid() {
  std::vector<AblationToggles> grid;
  for (GoalController c : {GoalController::kPic, GoalController::kPid}) {
    for (bool task2 : {true, false}) {
      for (bool task3 : {true, false}) {
        AblationToggles t;
        t.task2 = task2;
        t.task3 = task3;
        t.controller = c;
        grid.push_back(t);
      }
    }
  }
  return grid;
}

std::string run_directory_name(const std::string& scenario, std::uint64_t seed,
                               const AblationToggles& toggles) {
  std::ostringstream name;
  name << 's' << label(scenario) << "_seed" << seed << "_t2" << (toggles.task2 ? "on" : "off")
       << "_t3" << (toggles.task3 ? "on" : "off") << '_' << to_string(toggles.controller);
  return name.str();
}

int run_ablation(const AblationRequest& req, std::ostream& log) {
  if (req.scenarios.empty() || req.seeds.empty()) {
    log << "error: ablation needs at least one scenario and one seed\n";
    return kExitUsage;
  }

  std::vector<CellResult> cells;
  for (const auto& scenario : req.scenarios) {
    for (std::uint64_t seed : req.seeds) {
      for (const AblationToggles& t : ablation_grid()) {
        CellResult c;
        c.scenario = scenario;
        c.seed = seed;
        c.toggles = t;
        cells.push_back(c);
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellResult& c = cells[i];
      RunRequest r;
      r.scenario = c.scenario;
      r.seed = c.seed;
      r.task2 = c.toggles.task2;
      r.task3 = c.toggles.task3;
      r.controller = c.toggles.controller;
      r.out_dir = req.out_dir / run_directory_name(c.scenario, c.seed, c.toggles);
      r.volume_resolution = req.volume_resolution;
      std::ostringstream diag;
      const int code = execute(r, diag, &c.report);
      c.status = code == kExitOk ? "ok" : "exit" + std::to_string(code);
      std::lock_guard lock(log_mutex);
      log << "[" << (i + 1) << "/" << cells.size() << "] " << r.out_dir.filename().string()
          << ": " << c.status << '\n'
          << diag.str();
    }
  };

  unsigned workers = req.workers ? req.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  try {
    fs::create_directories(req.out_dir);
    write_file(req.out_dir / "summary.csv", summary_csv(cells));
    write_file(req.out_dir / "checks.csv", checks_csv(cells));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRunFailed;
  }
  const bool all_ok = std::all_of(cells.begin(), cells.end(),
                                  [](const CellResult& c) { return c.status == "ok"; });
  return all_ok ? kExitOk : kExitRunFailed;
}

}  // namespace thcsim::cli
