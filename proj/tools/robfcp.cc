// robfcp: Byzantine-robust federated conformal prediction simulator.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "robfcp/commands.h"
#include "robfcp/config.h"
#include "robfcp/error.h"
#include "robfcp/report_io.h"

namespace {

using robfcp::IoError;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

int fail(std::string_view code, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "ERROR:" << code << ":" << flat << "\n";
  return code == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust federated conformal prediction"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run seeded Monte-Carlo trials from a JSON config");
  std::string config_path, sim_out, sim_csv, sim_sweep, sim_attack;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> km_frac;
  std::optional<std::size_t> sim_trials;
  sim->add_option("--config", config_path, "Simulation config (JSON)")->required();
  sim->add_option("--seed", sim_seed, "Override the config seed");
  sim->add_option("--out", sim_out, "JSON report path (default stdout)");
  sim->add_option("--csv", sim_csv, "Also write per-trial CSV here");
  sim->add_option("--sweep", sim_sweep, "key=start:stop[:step]");
  sim->add_option("--attack", sim_attack, "Override attack: coverage|efficiency|gaussian|mimic|none");
  sim->add_option("--km-frac", km_frac, "Override k_m as round(frac * K)");
  sim->add_option("--trials", sim_trials, "Override the number of trials");

  // certify
  auto* cert = app.add_subcommand("certify", "Evaluate closed-form coverage certificates");
  robfcp::CertificateParams params;
  std::string variant = "normal", cert_sweep, cert_out;
  std::int64_t kb_reported = 0;
  cert->add_option("--alpha", params.alpha)->required();
  cert->add_option("--beta", params.beta)->required();
  cert->add_option("--H", params.H)->required();
  cert->add_option("--kb", params.k_b)->required();
  cert->add_option("--km", params.k_m)->required();
  cert->add_option("--nb", params.n_b)->required();
  cert->add_option("--nm", params.n_m_total)->required();
  cert->add_option("--sigma", params.sigma)->required();
  cert->add_option("--epsilon", params.epsilon)->required();
  cert->add_option("--variant", variant, "normal|dkw|homogeneous|overestimate");
  cert->add_option("--kb-reported", kb_reported, "Overestimated benign count (overestimate)");
  cert->add_option("--sweep", cert_sweep, "nb=start:stop[:step]; emits CSV");
  cert->add_option("--out", cert_out, "Output path (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the number of malicious clients");
  std::string est_reports, est_norm = "2";
  std::size_t max_iter = 10;
  est->add_option("--reports", est_reports, "Client reports (JSONL)")->required();
  est->add_option("--p", est_norm, "Distance: p >= 1, inf or cosine");
  est->add_option("--max-iter", max_iter);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Robust quantile over ingested client reports");
  std::string cal_reports, cal_norm = "2";
  double cal_alpha = 0.1;
  std::optional<std::size_t> cal_kb;
  bool estimate_km = false;
  cal->add_option("--reports", cal_reports, "Client reports (JSONL)")->required();
  cal->add_option("--alpha", cal_alpha)->required();
  auto* kb_opt = cal->add_option("--kb", cal_kb, "Number of benign clients");
  auto* est_flag = cal->add_flag("--estimate-km", estimate_km, "Estimate K_m from the reports");
  kb_opt->excludes(est_flag);
  cal->add_option("--p", cal_norm, "Distance: p >= 1, inf or cosine");

  // sketch
  auto* sk = app.add_subcommand("sketch", "Turn a probability CSV into client reports (JSONL)");
  std::string csv_path, sk_out, sk_kind = "lac";
  std::size_t sk_bins = 100;
  std::uint64_t sk_seed = 0;
  sk->add_option("--scores-csv", csv_path, "CSV: client_id,label,p_0,...")->required();
  sk->add_option("--H", sk_bins, "Number of histogram bins");
  sk->add_option("--kind", sk_kind, "lac|aps");
  sk->add_option("--seed", sk_seed, "Seed for the APS randomizer");
  sk->add_option("--out", sk_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (sim->parsed()) {
      const std::uint64_t fallback = std::random_device{}() * 0x100000001ULL ^ std::random_device{}();
      auto config = robfcp::parse_config_file(config_path, fallback);
      if (sim_seed) config.seed = *sim_seed;
      if (!sim_attack.empty()) config.attack.kind = robfcp::parse_attack_kind(sim_attack);
      if (km_frac) {
        if (!(*km_frac >= 0.0 && *km_frac < 0.5)) {
          throw robfcp::ConfigError("--km-frac must lie in [0, 0.5)");
        }
        config.k_m = static_cast<std::size_t>(std::llround(*km_frac * static_cast<double>(config.K)));
      }
      if (sim_trials) config.trials = *sim_trials;
      config.validate();
      std::optional<robfcp::SweepSpec> sweep;
      if (!sim_sweep.empty()) sweep = robfcp::parse_sweep(sim_sweep);
      const auto out = robfcp::simulate(config, sweep, robfcp::thread_budget());
      write_text(sim_out, out.report.dump(2) + "\n");
      if (!sim_csv.empty()) write_text(sim_csv, out.csv);
    } else if (cert->parsed()) {
      const auto v = robfcp::parse_certificate_variant(variant);
      if (!cert_sweep.empty()) {
        write_text(cert_out, robfcp::certify_sweep_csv(params, v, kb_reported,
                                                       robfcp::parse_sweep(cert_sweep)));
      } else {
        write_text(cert_out, robfcp::certify_json(params, v, kb_reported).dump(2) + "\n");
      }
    } else if (est->parsed()) {
      const auto reports = robfcp::read_reports_file(est_reports);
      const auto j = robfcp::estimate_json(reports, robfcp::DistanceNorm::parse(est_norm), max_iter);
      std::cout << j.dump(2) << "\n";
    } else if (cal->parsed()) {
      const auto reports = robfcp::read_reports_file(cal_reports);
      const auto j = robfcp::calibrate_json(reports, cal_alpha, cal_kb, estimate_km,
                                            robfcp::DistanceNorm::parse(cal_norm));
      std::cout << j.dump(2) << "\n";
    } else if (sk->parsed()) {
      std::ifstream in(csv_path);
      if (!in) throw IoError("cannot open scores CSV '" + csv_path + "'");
      const auto reports = robfcp::sketch_reports(robfcp::read_probability_csv(in), sk_bins,
                                                  robfcp::parse_score_kind(sk_kind), sk_seed);
      std::string text;
      for (const auto& r : reports) text += robfcp::report_to_json_line(r) + "\n";
      write_text(sk_out, text);
    }
  } catch (const robfcp::Error& e) {
    return fail(robfcp::error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
