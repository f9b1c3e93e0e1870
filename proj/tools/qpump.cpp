// qpump — command-line front end: model-config validation, TTM/OTM reports,
// parameter sweeps with CSV output, and normalized config dumps.
//
// Exit codes: 0 success, 1 validation/model failure, 2 usage/parse failure.

#include "qpump/qpump.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <clocale>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitModel = 1;
constexpr int kExitUsage = 2;

// 17 significant digits: enough to round-trip any double
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_vector(const std::vector<double>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out + "]";
}

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string metric;
  double value = 0.0;
};

// the flag is pre-validated by CLI11's IsMember check
std::optional<qpump::ConservationPolicy> parse_policy_flag(const std::string& flag) {
  if (flag.empty()) return std::nullopt;
  return flag == "warn" ? qpump::ConservationPolicy::Warn
                        : qpump::ConservationPolicy::Error;
}

qpump::PumpModel load_model(const std::string& path,
                            const std::optional<qpump::ConservationPolicy>& policy) {
  const qpump::ModelConfig config = qpump::parse_config_file(path);
  qpump::PumpModel model = qpump::instantiate(config);
  if (policy) model.options.conservation = *policy;
  return model;
}

void print_validation(const qpump::ValidationReport& report,
                      qpump::ConservationPolicy policy, std::ostream& out) {
  for (const auto& check : report.checks) {
    const char* status = "PASS";
    if (!check.passed)
      status = (policy == qpump::ConservationPolicy::Warn && check.conservation)
                   ? "WARN"
                   : "FAIL";
    out << status << " " << check.name;
    if (check.violation != 0.0) out << " (violation = " << fmt(check.violation) << ")";
    out << "\n";
  }
  if (report.degenerate_local_spectrum)
    out << "note: degenerate local spectrum detected; canonical basis convention applies\n";
  out << "result: " << (report.passed(policy) ? "VALID" : "INVALID") << "\n";
}

int cmd_validate(const std::string& path,
                 const std::optional<qpump::ConservationPolicy>& policy_flag) {
  const qpump::PumpModel model = load_model(path, policy_flag);
  const qpump::ValidationReport report = qpump::validate(model);
  print_validation(report, model.options.conservation, std::cout);
  return report.passed(model.options.conservation) ? kExitOk : kExitModel;
}

// ------------------------------------ run -----------------------------------

std::vector<CheckLine> ttm_checks(const qpump::PumpModel& model,
                                  const qpump::TtmReport& report,
                                  bool conserving) {
  std::vector<CheckLine> checks;
  checks.push_back({"ttm_ft_unity", std::abs(report.ft_value - 1.0) <= 1e-9,
                    "|<e^-b.Q>-1|", std::abs(report.ft_value - 1.0)});
  double moment = 0.0;
  for (size_t j = 0; j < report.avg_heat.size(); ++j)
    moment = std::max(moment,
                      std::abs(report.avg_heat[j] - report.avg_heat_trace[j]));
  checks.push_back(
      {"ttm_moment_identity", moment <= 1e-9, "max|dist-trace|", moment});
  checks.push_back({"ttm_entropy_production_nonneg",
                    report.entropy_production >= -1e-9, "sum_j b_j<Q_j>",
                    report.entropy_production});
  if (conserving)
    checks.push_back({"ttm_heat_sum_zero", std::abs(report.heat_sum) <= 1e-9,
                      "|sum_j<Q_j>|", std::abs(report.heat_sum)});
  const double jensen = report.ft_value * std::exp(report.entropy_production);
  checks.push_back(
      {"ttm_jensen", jensen >= 1.0 - 1e-12, "ft*e^{b.<Q>}", jensen});
  if (model.subsystem_count() == 2 && conserving) {
    const qpump::HeatDistribution dist = qpump::ttm_heat_distribution(model);
    if (dist.conservation_defect() <= qpump::tol::conservation) {
      const qpump::BipartiteResult bi = qpump::bipartite_reduction(
          dist, {model.beta[0], model.beta[1]});
      checks.push_back({"bipartite_ft_unity", std::abs(bi.ft_value - 1.0) <= 1e-9,
                        "|<e^-dB.Q>-1|", std::abs(bi.ft_value - 1.0)});
      checks.push_back({"bipartite_clausius_nonneg", bi.clausius_lhs >= -1e-9,
                        "dB.<Q>", bi.clausius_lhs});
    }
  }
  return checks;
}

std::vector<CheckLine> otm_checks(const qpump::OtmReport& report) {
  std::vector<CheckLine> checks;
  const double ft_dev =
      std::abs(report.ft_value_distribution - std::exp(-report.rel_entropy));
  checks.push_back(
      {"otm_ft_identity", ft_dev <= 1e-9, "|<e^-b.Q>-e^-S|", ft_dev});
  const double two_route =
      std::abs(report.ft_value - report.ft_value_distribution);
  checks.push_back({"otm_ft_partition_identity", two_route <= 1e-10,
                    "|Zt/Z-<e^-b.Q>|", two_route});
  const double s_dev = std::abs(report.rel_entropy - report.rel_entropy_closed_form);
  checks.push_back(
      {"otm_rel_entropy_two_path", s_dev <= 1e-9, "|S_trace-S_closed|", s_dev});
  const double decomp = std::abs(report.rel_entropy - report.mutual_info -
                                 report.gamma_rel_entropy);
  checks.push_back({"otm_decomposition", decomp <= 1e-9, "|S-I-S_gamma|", decomp});
  checks.push_back({"otm_second_law",
                    report.entropy_production - report.rel_entropy >= -1e-9,
                    "sp-S", report.entropy_production - report.rel_entropy});
  checks.push_back({"otm_mutual_info_bound",
                    report.rel_entropy - report.mutual_info >= -1e-9, "S-I",
                    report.rel_entropy - report.mutual_info});
  checks.push_back({"otm_mutual_info_nonneg", report.mutual_info >= -1e-9, "I",
                    report.mutual_info});
  checks.push_back(
      {"otm_delta_nonneg", report.delta >= -1e-9, "delta", report.delta});
  double moment = 0.0;
  for (size_t j = 0; j < report.avg_heat.size(); ++j)
    moment = std::max(moment,
                      std::abs(report.avg_heat[j] - report.avg_heat_trace[j]));
  checks.push_back(
      {"otm_moment_identity", moment <= 1e-9, "max|dist-trace|", moment});
  checks.push_back({"otm_per_level_conservation",
                    report.conservation_defect <= 1e-9, "max|sum_j q~_j|",
                    report.conservation_defect});
  const double jensen = report.ft_value * std::exp(report.entropy_production);
  checks.push_back(
      {"otm_jensen", jensen >= 1.0 - 1e-12, "ft*e^{b.<Q>}", jensen});
  return checks;
}

nlohmann::ordered_json ttm_json(const qpump::TtmReport& r) {
  nlohmann::ordered_json j;
  j["avg_heat"] = r.avg_heat;
  j["avg_heat_trace"] = r.avg_heat_trace;
  j["ft_value"] = r.ft_value;
  j["entropy_production"] = r.entropy_production;
  j["heat_sum"] = r.heat_sum;
  j["conservation_defect"] = r.conservation_defect;
  j["dropped_mass"] = r.dropped_mass;
  j["degenerate_local_spectrum"] = r.degenerate_local_spectrum;
  return j;
}

nlohmann::ordered_json otm_json(const qpump::OtmReport& r) {
  nlohmann::ordered_json j;
  j["avg_heat"] = r.avg_heat;
  j["avg_heat_trace"] = r.avg_heat_trace;
  j["ft_value"] = r.ft_value;
  j["ft_value_distribution"] = r.ft_value_distribution;
  j["rel_entropy"] = r.rel_entropy;
  j["rel_entropy_closed_form"] = r.rel_entropy_closed_form;
  j["mutual_info"] = r.mutual_info;
  j["gamma_rel_entropy"] = r.gamma_rel_entropy;
  j["entropy_production"] = r.entropy_production;
  j["delta"] = r.delta;
  j["conservation_defect"] = r.conservation_defect;
  j["dropped_mass"] = r.dropped_mass;
  j["degenerate_local_spectrum"] = r.degenerate_local_spectrum;
  return j;
}

void print_ttm_text(const qpump::TtmReport& r, std::ostream& out) {
  out << "[ttm]\n";
  out << "avg_heat = " << fmt_vector(r.avg_heat) << "\n";
  out << "avg_heat_trace = " << fmt_vector(r.avg_heat_trace) << "\n";
  out << "ft_value = " << fmt(r.ft_value) << "\n";
  out << "entropy_production = " << fmt(r.entropy_production) << "\n";
  out << "heat_sum = " << fmt(r.heat_sum) << "\n";
  out << "conservation_defect = " << fmt(r.conservation_defect) << "\n";
  out << "dropped_mass = " << fmt(r.dropped_mass) << "\n";
}

void print_otm_text(const qpump::OtmReport& r, std::ostream& out) {
  out << "[otm]\n";
  out << "avg_heat = " << fmt_vector(r.avg_heat) << "\n";
  out << "avg_heat_trace = " << fmt_vector(r.avg_heat_trace) << "\n";
  out << "ft_value = " << fmt(r.ft_value) << "\n";
  out << "ft_value_distribution = " << fmt(r.ft_value_distribution) << "\n";
  out << "rel_entropy = " << fmt(r.rel_entropy) << "\n";
  out << "rel_entropy_closed_form = " << fmt(r.rel_entropy_closed_form) << "\n";
  out << "mutual_info = " << fmt(r.mutual_info) << "\n";
  out << "gamma_rel_entropy = " << fmt(r.gamma_rel_entropy) << "\n";
  out << "entropy_production = " << fmt(r.entropy_production) << "\n";
  out << "delta = " << fmt(r.delta) << "\n";
  out << "conservation_defect = " << fmt(r.conservation_defect) << "\n";
  out << "dropped_mass = " << fmt(r.dropped_mass) << "\n";
}

int cmd_run(const std::string& path, const std::string& scheme,
            const std::string& format,
            const std::optional<qpump::ConservationPolicy>& policy_flag) {
  const qpump::PumpModel model = load_model(path, policy_flag);
  const qpump::ValidationReport validation = qpump::validate(model);
  if (!validation.passed(model.options.conservation)) {
    print_validation(validation, model.options.conservation, std::cerr);
    return kExitModel;
  }
  const bool conserving = validation.all_passed();
  const bool want_ttm = scheme == "ttm" || scheme == "both";
  const bool want_otm = scheme == "otm" || scheme == "both";

  std::optional<qpump::TtmReport> ttm;
  std::optional<qpump::OtmReport> otm;
  if (want_ttm) ttm = qpump::ttm_report(model);
  if (want_otm) otm = qpump::otm_report(model);

  std::vector<CheckLine> checks;
  if (ttm) {
    auto c = ttm_checks(model, *ttm, conserving);
    checks.insert(checks.end(), c.begin(), c.end());
  }
  if (otm) {
    auto c = otm_checks(*otm);
    checks.insert(checks.end(), c.begin(), c.end());
  }
  if (ttm && otm) {
    double agree = 0.0;
    for (size_t j = 0; j < ttm->avg_heat.size(); ++j)
      agree = std::max(agree, std::abs(ttm->avg_heat[j] - otm->avg_heat[j]));
    checks.push_back(
        {"ttm_otm_moment_agreement", agree <= 1e-9, "max|ttm-otm|", agree});
  }

  if (format == "text") {
    std::cout << "model: subsystems=" << model.subsystem_count()
              << " total_dim=" << model.total_dim() << " tau=" << fmt(model.tau)
              << "\n";
    if (validation.degenerate_local_spectrum)
      std::cout << "note: degenerate local spectrum detected\n";
    if (ttm) print_ttm_text(*ttm, std::cout);
    if (otm) print_otm_text(*otm, std::cout);
    std::cout << "[checks]\n";
    for (const auto& c : checks)
      std::cout << (c.passed ? "PASS" : "FAIL") << " " << c.name << " "
                << c.metric << " = " << fmt(c.value) << "\n";
  } else if (format == "json") {
    nlohmann::ordered_json doc;
    doc["model"] = {{"subsystems", model.subsystem_count()},
                    {"total_dim", model.total_dim()},
                    {"tau", model.tau},
                    {"degenerate_local_spectrum",
                     validation.degenerate_local_spectrum}};
    if (ttm) doc["ttm"] = ttm_json(*ttm);
    if (otm) doc["otm"] = otm_json(*otm);
    doc["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks)
      doc["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"metric", c.metric},
                               {"value", c.value}});
    std::cout << doc.dump(2) << "\n";
  } else {  // csv
    std::cout << "scheme,avg_heat,ft_value,entropy_production,heat_sum,"
                 "rel_entropy,mutual_info,gamma_rel_entropy,delta,"
                 "conservation_defect,dropped_mass\n";
    auto heat_field = [](const std::vector<double>& v) {
      std::string out;
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ";";
        out += fmt(v[i]);
      }
      return out;
    };
    if (ttm)
      std::cout << "ttm," << heat_field(ttm->avg_heat) << ","
                << fmt(ttm->ft_value) << "," << fmt(ttm->entropy_production)
                << "," << fmt(ttm->heat_sum) << ",,,,,"
                << fmt(ttm->conservation_defect) << ","
                << fmt(ttm->dropped_mass) << "\n";
    if (otm)
      std::cout << "otm," << heat_field(otm->avg_heat) << ","
                << fmt(otm->ft_value) << "," << fmt(otm->entropy_production)
                << ",," << fmt(otm->rel_entropy) << "," << fmt(otm->mutual_info)
                << "," << fmt(otm->gamma_rel_entropy) << "," << fmt(otm->delta)
                << "," << fmt(otm->conservation_defect) << ","
                << fmt(otm->dropped_mass) << "\n";
  }
  return kExitOk;
}

// ----------------------------------- sweep ----------------------------------

struct SweepRow {
  double param = 0.0;
  qpump::TtmReport ttm;
  qpump::OtmReport otm;
};

int cmd_sweep(const std::string& path, const std::string& param, double start,
              double stop, int count, const std::string& out_path, int jobs,
              const std::optional<qpump::ConservationPolicy>& policy_flag) {
  const qpump::ModelConfig config = qpump::parse_config_file(path);
  if (!qpump::referenced_parameters(config).count(param)) {
    std::cerr << "sweep: parameter '" << param
              << "' is not referenced by the config\n";
    return kExitModel;
  }
  if (count < 1) {
    std::cerr << "sweep: --count must be >= 1\n";
    return kExitUsage;
  }
  if (stop < start) {
    std::cerr << "sweep: --stop must be >= --start\n";
    return kExitUsage;
  }

  std::vector<double> grid(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    grid[static_cast<size_t>(i)] =
        count == 1 ? start
                   : start + (stop - start) * static_cast<double>(i) /
                         static_cast<double>(count - 1);

  std::vector<SweepRow> rows(grid.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= grid.size() || failed.load()) break;
      try {
        qpump::PumpModel model = qpump::instantiate(config, {{param, grid[i]}});
        if (policy_flag) model.options.conservation = *policy_flag;
        rows[i].param = grid[i];
        rows[i].ttm = qpump::ttm_report(model);
        rows[i].otm = qpump::otm_report(model);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };

  const int thread_count = std::max(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "sweep: cannot write '" << out_path << "'\n";
    return kExitModel;
  }
  out << "param,entropy_production,rel_entropy,mutual_info,gamma_rel_entropy,"
         "delta,ft_value_ttm,ft_value_otm,conservation_defect\n";
  for (const SweepRow& row : rows)
    out << fmt(row.param) << "," << fmt(row.otm.entropy_production) << ","
        << fmt(row.otm.rel_entropy) << "," << fmt(row.otm.mutual_info) << ","
        << fmt(row.otm.gamma_rel_entropy) << "," << fmt(row.otm.delta) << ","
        << fmt(row.ttm.ft_value) << "," << fmt(row.otm.ft_value) << ","
        << fmt(row.ttm.conservation_defect) << "\n";
  out.flush();
  std::cout << "sweep: wrote " << rows.size() << " rows to " << out_path << "\n";
  return kExitOk;
}

int cmd_dump(const std::string& path,
             const std::optional<qpump::ConservationPolicy>& policy_flag) {
  const qpump::PumpModel model = load_model(path, policy_flag);
  std::cout << qpump::dump_model(model).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"energy-conserving quantum pump statistics: exchange "
               "fluctuation theorems in the two-time and one-time "
               "measurement schemes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string conservation_flag;
  std::string scheme = "both";
  std::string format = "text";
  std::string sweep_param;
  std::string sweep_out;
  double sweep_start = 0.0, sweep_stop = 0.0;
  int sweep_count = 1;
  int jobs = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "model config JSON")->required();
    cmd->add_option("--conservation", conservation_flag,
                    "override the conservation policy: error|warn")
        ->check(CLI::IsMember({"error", "warn"}));
  };

  CLI::App* validate = app.add_subcommand("validate", "check model invariants");
  add_common(validate);

  CLI::App* run = app.add_subcommand("run", "compute scheme reports");
  add_common(run);
  run->add_option("--scheme", scheme, "ttm|otm|both (default both)")
      ->check(CLI::IsMember({"ttm", "otm", "both"}));
  run->add_option("--format", format, "text|json|csv (default text)")
      ->check(CLI::IsMember({"text", "json", "csv"}));

  CLI::App* sweep = app.add_subcommand("sweep", "sweep a named parameter");
  add_common(sweep);
  sweep->add_option("--param", sweep_param, "parameter name")->required();
  sweep->add_option("--start", sweep_start, "grid start")->required();
  sweep->add_option("--stop", sweep_stop, "grid stop")->required();
  sweep->add_option("--count", sweep_count, "grid points")->required();
  sweep->add_option("--out", sweep_out, "output CSV path")->required();
  sweep->add_option("--jobs", jobs, "worker threads (default 1)");

  CLI::App* dump = app.add_subcommand("dump", "print the normalized config");
  add_common(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto policy = parse_policy_flag(conservation_flag);
    if (validate->parsed()) return cmd_validate(config_path, policy);
    if (run->parsed()) return cmd_run(config_path, scheme, format, policy);
    if (sweep->parsed())
      return cmd_sweep(config_path, sweep_param, sweep_start, sweep_stop,
                       sweep_count, sweep_out, jobs, policy);
    if (dump->parsed()) return cmd_dump(config_path, policy);
  } catch (const qpump::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModel;
  }
  return kExitUsage;
}
