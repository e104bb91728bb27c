#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "bridgecp/cli.hpp"
#include "json.hpp"

namespace bridgecp {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::ordered_json;

// Auxiliary random streams sit far above the chain indices.
constexpr std::uint64_t kPValueStream = 1000;

constexpr const char* kDrawsFile = "draws.csv";
constexpr const char* kPanelFile = "panel.csv";
constexpr const char* kConfigFile = "config.txt";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kReportFile = "report.json";
constexpr const char* kByYearFile = "series_by_year.csv";
constexpr const char* kProfilesFile = "series_profiles.csv";
constexpr const char* kDiagnoseFile = "diagnose.json";
constexpr const char* kCompareFile = "compare.csv";

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json scalar(const ScalarSummary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"lower_2.5", s.lower}, {"upper_97.5", s.upper}};
}

std::string csv_num(double v) { return format_double(v); }

std::string series_by_year_csv(const PosteriorSummary& s) {
  std::ostringstream os;
  os << "year,n_records,observed,posterior_mean,lower,upper\n";
  for (const auto& p : s.by_year)
    os << p.year << ',' << p.n_records << ',' << (p.observed ? csv_num(*p.observed) : "") << ','
       << csv_num(p.mean) << ',' << csv_num(p.lower) << ',' << csv_num(p.upper) << '\n';
  return os.str();
}

std::string series_profiles_csv(const PosteriorSummary& s, double age_center) {
  std::ostringstream os;
  os << "profile,age,repeat_offense,severe,year,posterior_mean,lower,upper\n";
  for (const auto& series : s.profiles)
    for (const auto& p : series.points)
      os << series.profile.name << ',' << csv_num(series.profile.age.value_or(age_center)) << ','
         << series.profile.repeat_offense << ',' << series.profile.severe << ',' << p.year << ','
         << csv_num(p.mean) << ',' << csv_num(p.lower) << ',' << csv_num(p.upper) << '\n';
  return os.str();
}

json convergence_json(const PosteriorDraws& draws, std::size_t max_lag) {
  json rows = json::array();
  const std::size_t per_chain = draws.n_chains ? draws.draws.size() / draws.n_chains : 0;
  for (const auto& name : scalar_parameter_names(draws)) {
    json row{{"parameter", name}};
    if (draws.n_chains >= 2 && per_chain >= 4)
      row["psrf"] = gelman_rubin(draws, name);
    else
      row["psrf"] = nullptr;
    if (per_chain > 1) {
      const auto acf = autocorrelation_and_ess(draws, name, std::min(max_lag, per_chain - 1));
      row["ess"] = acf.ess;
      row["acf"] = acf.acf;
    } else {
      row["ess"] = nullptr;
    }
    rows.push_back(row);
  }
  return rows;
}

struct LoadedRun {
  RunConfig config;
  Panel panel;
  PosteriorDraws draws;
  json manifest;
};

LoadedRun load_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("run directory " + dir.string() + " does not exist");
  RunConfig config = load_config(dir / kConfigFile);
  const json manifest = json::parse(read_text(dir / kManifestFile));
  PanelOptions options = config.panel;
  Panel panel = load_panel(dir / kPanelFile, options);
  if (panel.hash() != manifest.at("panel_hash").get<std::string>())
    throw std::runtime_error(dir.string() + ": panel hash does not match the manifest");
  if (config.hash() != manifest.at("config_hash").get<std::string>())
    throw std::runtime_error(dir.string() + ": config hash does not match the manifest");
  std::ifstream in(dir / kDrawsFile, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + (dir / kDrawsFile).string());
  PosteriorDraws draws = read_draws(in, panel);
  return {std::move(config), std::move(panel), std::move(draws), manifest};
}

void write_fit_outputs(const fs::path& out, const RunConfig& config, const Panel& panel,
                       const PosteriorDraws& draws, const FitSummary& fit,
                       const PosteriorSummary& summary) {
  write_text(out / kReportFile, report_json(config, panel, draws, fit, summary));
  write_text(out / kByYearFile, series_by_year_csv(summary));
  write_text(out / kProfilesFile, series_profiles_csv(summary, panel.age_center()));
}

}  // namespace

Panel resolve_panel(const RunConfig& config) {
  if (config.data && config.cohort) throw ConfigError("give either `data` or a cohort generator, not both");
  if (config.data) return load_panel(*config.data, config.panel);
  if (config.cohort) return generate_cohort(*config.cohort, config.truth, config.require_seed(), config.panel).panel;
  throw ConfigError("no data source: set `data = <panel.csv>` or `cohort = paper`");
}

SimulateResult cmd_simulate(const RunConfig& config, std::ostream& log) {
  if (config.data) throw ConfigError("simulate generates a cohort; remove `data`");
  const CohortShape shape = config.cohort.value_or(CohortShape{});
  const std::uint64_t seed = config.require_seed();
  shape.validate(config.panel);
  const Cohort cohort = generate_cohort(shape, config.truth, seed, config.panel);
  ensure_dir(config.out);
  SimulateResult r;
  r.n_clusters = cohort.panel.n_clusters();
  r.n_records = cohort.panel.n_records();
  r.panel_path = config.out / kPanelFile;
  r.truth_path = config.out / "truth.json";
  save_panel(r.panel_path, cohort.panel);
  write_text(r.truth_path, truth_json(cohort));
  log << "simulated " << r.n_clusters << " clusters, " << r.n_records << " records -> "
      << r.panel_path.string() << "\n";
  return r;
}

std::string report_json(const RunConfig& config, const Panel& panel, const PosteriorDraws& draws,
                        const FitSummary& fit, const PosteriorSummary& summary) {
  json j;
  j["model"] = config.spec.label();
  j["canonical_model"] = config.spec.canonical();
  j["spec"] = config.spec.canonical_text();
  j["seed"] = config.require_seed();
  j["hashes"] = {{"config", config.hash()},
                 {"spec", hash_hex(fnv1a64(config.spec.canonical_text()))},
                 {"panel", panel.hash()}};
  const auto& d = panel.options().design;
  j["design"] = {{"intercept", d.intercept},
                 {"age_center", panel.age_center()},
                 {"year_center", d.year_center},
                 {"notification", d.notification == NotificationCoding::none
                                      ? "none"
                                      : (d.notification == NotificationCoding::from_year ? "from_year"
                                                                                        : "single_year")},
                 {"notification_year", d.notification_year},
                 {"x1", panel.x1_names()}};
  if (config.spec.has_changepoint()) j["design"]["x2"] = Panel::x2_names();
  j["panel"] = {{"n_records", panel.n_records()},
                {"n_clusters", panel.n_clusters()},
                {"warnings", panel.warnings()}};
  j["sampler"] = {{"iterations", config.sampler.n_iterations},
                  {"burn_in", config.sampler.burn_in},
                  {"thinning", config.sampler.thinning},
                  {"chains", config.sampler.n_chains},
                  {"retained_draws", draws.draws.size()},
                  {"kernel", "slice sampling (doubling, shrinkage)"},
                  {"interweave", config.sampler.interweave},
                  {"collapse_gamma", config.sampler.collapse_gamma}};
  j["fit"] = {{"deviance", to_string(fit.deviance_mode)},
              {"plugin", fit.plugin},
              {"D_bar", fit.dic.d_bar},
              {"D_at_plugin", fit.dic.d_at_plugin},
              {"p_D", fit.dic.p_d},
              {"DIC", fit.dic.dic},
              {"LPML", fit.lpml},
              {"cpo_underflows", fit.cpo_underflows},
              {"bayesian_p", fit.pvalue.p},
              {"pvalue_replication", to_string(fit.pvalue_mode)},
              {"pvalue_clamped", fit.pvalue.clamped}};
  json odds = json::array();
  for (const auto& row : summary.odds) {
    json r{{"name", row.name}};
    r.update(scalar(row.odds));
    odds.push_back(r);
  }
  j["odds_ratios"] = odds;
  if (summary.repeat_before && summary.repeat_after)
    j["repeat_offense_odds"] = {{"before_changepoint", scalar(*summary.repeat_before)},
                                {"after_changepoint", scalar(*summary.repeat_after)}};
  if (config.spec.has_changepoint()) {
    json cp = json::array();
    for (const auto& row : summary.changepoint) {
      json r{{"year", row.year}, {"probability", row.frequency}};
      if (row.gamma) r["gamma"] = scalar(*row.gamma);
      cp.push_back(r);
    }
    j["changepoint"] = cp;
  }
  j["phi"] = scalar(summary.phi);
  j["convergence"] = convergence_json(draws, 40);
  j["series"] = {{"band_level", summary.band_level}, {"by_year", kByYearFile}, {"profiles", kProfilesFile}};
  return j.dump(2) + "\n";
}

FitResult cmd_fit(const RunConfig& config, std::ostream& log) {
  const std::uint64_t seed = config.require_seed();
  const Panel panel = resolve_panel(config);
  config.spec.validate(panel.candidate_years());
  ensure_dir(config.out);
  log << config.spec.label() << " on " << panel.n_clusters() << " clusters / " << panel.n_records()
      << " records; " << config.sampler.n_chains << " chains x " << config.sampler.n_iterations
      << " iterations\n";

  SamplerConfig sampler = config.sampler;
  sampler.seed = seed;
  FitResult r;
  r.draws = run_chains(panel, config.spec, sampler);
  Rng rng = Rng::derive(seed, kPValueStream);
  r.fit = summarize_fit(r.draws, panel, rng, config.deviance, config.pvalue);
  r.summary = summarize_posterior(r.draws, panel, config.summary);

  r.draws_path = config.out / kDrawsFile;
  r.report_path = config.out / kReportFile;
  {
    std::ofstream out(r.draws_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + r.draws_path.string());
    write_draws(out, r.draws);
    if (!out) throw std::runtime_error("failed writing " + r.draws_path.string());
  }
  save_panel(config.out / kPanelFile, panel);
  write_text(config.out / kConfigFile, config.canonical_text());
  json manifest{{"seed", seed},
                {"config_hash", config.hash()},
                {"spec_hash", hash_hex(fnv1a64(config.spec.canonical_text()))},
                {"panel_hash", panel.hash()},
                {"model", config.spec.label()},
                {"retained_draws", r.draws.draws.size()},
                {"files",
                 {{"draws", kDrawsFile},
                  {"panel", kPanelFile},
                  {"config", kConfigFile},
                  {"report", kReportFile},
                  {"series_by_year", kByYearFile},
                  {"series_profiles", kProfilesFile}}}};
  write_text(config.out / kManifestFile, manifest.dump(2) + "\n");
  write_fit_outputs(config.out, config, panel, r.draws, r.fit, r.summary);
  log << "DIC " << r.fit.dic.dic << " (p_D " << r.fit.dic.p_d << "), LPML " << r.fit.lpml
      << ", Bayesian p " << r.fit.pvalue.p << "\n";
  return r;
}

void cmd_summarize(const fs::path& run_dir, const fs::path& out, std::ostream& log) {
  LoadedRun run = load_run(run_dir);
  if (run.draws.draws.empty()) throw std::runtime_error("draws file has no rows");
  Rng rng = Rng::derive(run.config.require_seed(), kPValueStream);
  const FitSummary fit = summarize_fit(run.draws, run.panel, rng, run.config.deviance, run.config.pvalue);
  const PosteriorSummary summary = summarize_posterior(run.draws, run.panel, run.config.summary);
  ensure_dir(out);
  write_fit_outputs(out, run.config, run.panel, run.draws, fit, summary);
  log << "summarized " << run.draws.draws.size() << " draws -> " << (out / kReportFile).string() << "\n";
}

void cmd_diagnose(const fs::path& run_dir, const fs::path& out, std::size_t max_lag, std::ostream& log) {
  LoadedRun run = load_run(run_dir);
  if (run.draws.draws.empty()) throw std::runtime_error("draws file has no rows");
  const json rows = convergence_json(run.draws, max_lag);
  ensure_dir(out);
  write_text(out / kDiagnoseFile,
             json{{"model", run.config.spec.label()}, {"max_lag", max_lag}, {"parameters", rows}}.dump(2) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %10s %10s %8s\n", "parameter", "psrf", "ess", "acf(1)");
  log << buf;
  for (const auto& row : rows) {
    const std::string psrf = row["psrf"].is_null() ? "n/a" : format_double(row["psrf"].get<double>()).substr(0, 8);
    const std::string ess = row["ess"].is_null() ? "n/a" : std::to_string(static_cast<long>(row["ess"].get<double>()));
    const double acf1 = row.contains("acf") && row["acf"].size() > 1 ? row["acf"][1].get<double>() : 0.0;
    std::snprintf(buf, sizeof buf, "%-18s %10s %10s %8.3f\n", row["parameter"].get<std::string>().c_str(),
                  psrf.c_str(), ess.c_str(), acf1);
    log << buf;
  }
}

std::vector<CompareRow> cmd_compare(const std::vector<fs::path>& run_dirs, const std::optional<fs::path>& out,
                                    std::ostream& log) {
  if (run_dirs.size() < 2) throw ConfigError("compare needs at least two fitted runs");
  std::vector<CompareRow> rows;
  std::string panel_hash;
  fs::path panel_owner;
  for (const auto& dir : run_dirs) {
    const json manifest = json::parse(read_text(dir / kManifestFile));
    const json report = json::parse(read_text(dir / kReportFile));
    if (report.at("hashes").at("config") != manifest.at("config_hash"))
      throw std::runtime_error(dir.string() + ": report and manifest carry different config hashes");
    const std::string ph = manifest.at("panel_hash").get<std::string>();
    if (report.at("hashes").at("panel") != ph)
      throw std::runtime_error(dir.string() + ": report and manifest carry different panel hashes");
    if (panel_hash.empty()) {
      panel_hash = ph;
      panel_owner = dir;
    } else if (ph != panel_hash) {
      throw std::runtime_error("runs were fitted to different panels: " + panel_owner.string() + " has " +
                               panel_hash + ", " + dir.string() + " has " + ph);
    }
    const json& fit = report.at("fit");
    CompareRow row;
    row.run = dir.string();
    row.model = report.at("model").get<std::string>();
    row.d_bar = fit.at("D_bar").get<double>();
    row.p_d = fit.at("p_D").get<double>();
    row.dic = fit.at("DIC").get<double>();
    row.lpml = fit.at("LPML").get<double>();
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) { return a.dic < b.dic; });
  for (auto& row : rows) {
    row.dic_gap = row.dic - rows.front().dic;
    row.overwhelming = row.dic_gap > 10.0;
  }
  std::ostringstream csv;
  csv << "run,model,D_bar,p_D,DIC,LPML,DIC_gap,overwhelming\n";
  for (const auto& row : rows)
    csv << row.run << ',' << row.model << ',' << csv_num(row.d_bar) << ',' << csv_num(row.p_d) << ','
        << csv_num(row.dic) << ',' << csv_num(row.lpml) << ',' << csv_num(row.dic_gap) << ','
        << (row.overwhelming ? "yes" : "no") << '\n';
  if (out) {
    ensure_dir(*out);
    write_text(*out / kCompareFile, csv.str());
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %-24s %10s %8s %10s %10s %9s\n", "run", "model", "D_bar", "p_D", "DIC",
                "LPML", "DIC gap");
  log << buf;
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-28s %-24s %10.2f %8.2f %10.2f %10.2f %9.2f%s\n", row.run.c_str(),
                  row.model.c_str(), row.d_bar, row.p_d, row.dic, row.lpml, row.dic_gap,
                  row.overwhelming ? "  (> 10: overwhelmingly worse)" : "");
    log << buf;
  }
  return rows;
}

}  // namespace bridgecp
