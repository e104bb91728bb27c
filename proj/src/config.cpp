#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "bridgecp/cli.hpp"

namespace bridgecp {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string origin)
      : entries_(std::move(entries)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  bool has_prefix(const std::string& prefix) const {
    auto it = entries_.lower_bound(prefix);
    return it != entries_.end() && it->first.rfind(prefix, 0) == 0;
  }
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.rfind(prefix, 0) == 0; ++it)
      out.push_back(it->first);
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? origin_ : origin_ + ":" + std::to_string(it->second.line);
    throw ConfigError(where + ": " + key + ": " + msg);
  }

  const std::string& raw(const std::string& key) {
    used_.insert(key);
    return entries_.at(key).value;
  }

  template <class T>
  T number(const std::string& key, const std::string& text) const {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
      fail(key, "'" + text + "' is not a valid number");
    return v;
  }

  template <class T>
  void get(const std::string& key, T& target) {
    if (!has(key)) return;
    const std::string& v = raw(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "yes" || v == "1") target = true;
      else if (v == "false" || v == "no" || v == "0") target = false;
      else fail(key, "expected true or false, got '" + v + "'");
    } else {
      target = number<T>(key, v);
    }
  }

  template <class T>
  std::vector<T> list(const std::string& key) {
    std::vector<T> out;
    for (const auto& part : split_csv_line(raw(key))) out.push_back(number<T>(key, trim(part)));
    return out;
  }

  void check_all_used() const {
    for (const auto& [k, e] : entries_)
      if (!used_.count(k)) throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": unknown key '" + k + "'");
  }

 private:
  std::map<std::string, Entry> entries_;
  std::string origin_;
  std::set<std::string> used_;
};

std::string num(double v) { return format_double(v); }

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ",";
    if constexpr (std::is_floating_point_v<T>) out += num(v[k]);
    else out += std::to_string(v[k]);
  }
  return out;
}

const char* notification_name(NotificationCoding c) {
  switch (c) {
    case NotificationCoding::none: return "none";
    case NotificationCoding::from_year: return "from_year";
    case NotificationCoding::single_year: return "single_year";
  }
  return "from_year";
}

}  // namespace

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required (set `seed` in the config or pass --seed)");
  return *seed;
}

std::string RunConfig::canonical_text() const {
  std::ostringstream os;
  if (seed) os << "seed = " << *seed << "\n";
  if (data) os << "data = " << data->generic_string() << "\n";
  if (cohort) {
    os << "cohort = paper\n";
    std::string sizes;
    for (auto [size, count] : cohort->cluster_sizes)
      sizes += (sizes.empty() ? "" : ",") + std::to_string(size) + ":" + std::to_string(count);
    os << "cohort.cluster_sizes = " << sizes << "\n"
       << "cohort.first_age_mean = " << num(cohort->first_age_mean) << "\n"
       << "cohort.age_sd = " << num(cohort->age_sd) << "\n"
       << "cohort.age_min = " << num(cohort->age_min) << "\n"
       << "cohort.age_max = " << num(cohort->age_max) << "\n"
       << "cohort.p_severe_first = " << num(cohort->p_severe_first) << "\n"
       << "cohort.p_severe_repeat = " << num(cohort->p_severe_repeat) << "\n"
       << "cohort.gap_p = " << num(cohort->gap_p) << "\n";
    if (!cohort->first_year_weights.empty())
      os << "cohort.first_year_weights = " << join(cohort->first_year_weights) << "\n";
    os << "truth.phi = " << num(truth.phi) << "\n"
       << "truth.T = " << (truth.T ? std::to_string(*truth.T) : "none") << "\n";
    for (const auto& [k, v] : truth.beta1) os << "truth." << k << " = " << num(v) << "\n";
    for (const auto& [k, v] : truth.beta2) os << "truth." << k << " = " << num(v) << "\n";
  }
  os << "panel.first_year = " << panel.first_year << "\n"
     << "panel.last_year = " << panel.last_year << "\n"
     << "panel.candidate_years = " << join(panel.candidate_years) << "\n"
     << "panel.strict = " << (panel.strict ? "true" : "false") << "\n"
     << "design.intercept = " << (panel.design.intercept ? "true" : "false") << "\n";
  if (panel.design.age_center) os << "design.age_center = " << num(*panel.design.age_center) << "\n";
  os << "design.year_center = " << panel.design.year_center << "\n"
     << "design.notification = " << notification_name(panel.design.notification) << "\n"
     << "design.notification_year = " << panel.design.notification_year << "\n";
  if (spec.model_id) {
    os << "model = " << *spec.model_id << "\n";
  } else {
    os << "model = custom\n"
       << "prior.tau = " << num(spec.tau) << "\n"
       << "prior.phi_a = " << num(spec.phi_a) << "\n"
       << "prior.phi_b = " << num(spec.phi_b) << "\n";
    if (const auto* w = spec.dirichlet()) {
      os << "prior.changepoint = dirichlet\nprior.alpha = " << join(w->alpha) << "\n";
    } else if (const auto* f = std::get_if<FixedChangepoint>(&spec.changepoint)) {
      os << "prior.changepoint = fixed\nprior.fixed_year = " << f->year << "\n";
    } else {
      os << "prior.changepoint = none\n";
    }
  }
  os << "sampler.iterations = " << sampler.n_iterations << "\n"
     << "sampler.burn_in = " << sampler.burn_in << "\n"
     << "sampler.thinning = " << sampler.thinning << "\n"
     << "sampler.chains = " << sampler.n_chains << "\n"
     << "sampler.slice_width = " << num(sampler.slice.initial_width) << "\n"
     << "sampler.max_doublings = " << sampler.slice.max_doublings << "\n"
     << "sampler.adapt_widths = " << (sampler.adapt_widths ? "true" : "false") << "\n"
     << "sampler.collapse_gamma = " << (sampler.collapse_gamma ? "true" : "false") << "\n"
     << "sampler.interweave = " << (sampler.interweave ? "true" : "false") << "\n"
     << "sampler.jitter_init = " << (sampler.jitter_init ? "true" : "false") << "\n"
     << "diagnostics.deviance = " << to_string(deviance) << "\n"
     << "diagnostics.pvalue = " << to_string(pvalue) << "\n"
     << "summary.band_level = " << num(summary.band_level) << "\n";
  return os.str();
}

std::string RunConfig::hash() const { return hash_hex(fnv1a64(canonical_text())); }

RunConfig parse_config(std::istream& in, const std::string& origin) {
  std::map<std::string, Entry> entries;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(n) + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(n) + ": empty key");
    if (!entries.emplace(key, Entry{value, n}).second)
      throw ConfigError(origin + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
  }
  Reader r(std::move(entries), origin);
  RunConfig c;

  if (r.has("seed")) c.seed = r.number<std::uint64_t>("seed", r.raw("seed"));
  if (r.has("out")) c.out = r.raw("out");
  if (r.has("data")) c.data = r.raw("data");

  const bool cohort = r.has("cohort") || r.has_prefix("cohort.");
  if (cohort) {
    if (c.data) r.fail("data", "give either `data` or a cohort generator, not both");
    if (r.has("cohort") && r.raw("cohort") != "paper")
      r.fail("cohort", "only the `paper` base shape is known; override fields with cohort.*");
    CohortShape s;
    if (r.has("cohort.cluster_sizes")) {
      s.cluster_sizes.clear();
      for (const auto& part : split_csv_line(r.raw("cohort.cluster_sizes"))) {
        const auto colon = part.find(':');
        if (colon == std::string::npos) r.fail("cohort.cluster_sizes", "expected size:count pairs");
        const int size = r.number<int>("cohort.cluster_sizes", trim(part.substr(0, colon)));
        const int count = r.number<int>("cohort.cluster_sizes", trim(part.substr(colon + 1)));
        s.cluster_sizes[size] += count;
      }
    }
    r.get("cohort.first_age_mean", s.first_age_mean);
    r.get("cohort.age_sd", s.age_sd);
    r.get("cohort.age_min", s.age_min);
    r.get("cohort.age_max", s.age_max);
    r.get("cohort.p_severe_first", s.p_severe_first);
    r.get("cohort.p_severe_repeat", s.p_severe_repeat);
    r.get("cohort.gap_p", s.gap_p);
    if (r.has("cohort.first_year_weights")) s.first_year_weights = r.list<double>("cohort.first_year_weights");
    c.cohort = s;
  }
  if (r.has_prefix("truth.")) {
    if (!cohort) r.fail(r.keys_with_prefix("truth.").front(), "truth values need a cohort generator");
    const auto& x2 = Panel::x2_names();
    for (const auto& key : r.keys_with_prefix("truth.")) {
      const std::string name = key.substr(6);
      if (name == "phi") {
        r.get(key, c.truth.phi);
      } else if (name == "T") {
        const std::string v = r.raw(key);
        c.truth.T = v == "none" ? std::nullopt : std::optional<int>(r.number<int>(key, v));
      } else if (std::find(x2.begin(), x2.end(), name) != x2.end()) {
        r.get(key, c.truth.beta2[name]);
      } else {
        const auto names = x1_names(DesignConfig{});
        if (std::find(names.begin(), names.end(), name) == names.end()) r.fail(key, "unknown coefficient");
        r.get(key, c.truth.beta1[name]);
      }
    }
  }

  r.get("panel.first_year", c.panel.first_year);
  r.get("panel.last_year", c.panel.last_year);
  if (r.has("panel.candidate_years")) c.panel.candidate_years = r.list<int>("panel.candidate_years");
  r.get("panel.strict", c.panel.strict);
  r.get("design.intercept", c.panel.design.intercept);
  if (r.has("design.age_center")) {
    double v = 0.0;
    r.get("design.age_center", v);
    c.panel.design.age_center = v;
  }
  r.get("design.year_center", c.panel.design.year_center);
  if (r.has("design.notification")) {
    const std::string v = r.raw("design.notification");
    if (v == "none") c.panel.design.notification = NotificationCoding::none;
    else if (v == "from_year") c.panel.design.notification = NotificationCoding::from_year;
    else if (v == "single_year") c.panel.design.notification = NotificationCoding::single_year;
    else r.fail("design.notification", "expected none, from_year or single_year");
  }
  r.get("design.notification_year", c.panel.design.notification_year);

  const bool prior_keys = r.has_prefix("prior.");
  std::string model = r.has("model") ? r.raw("model") : (prior_keys ? "custom" : "1");
  if (model == "custom") {
    ModelSpec s;
    r.get("prior.tau", s.tau);
    r.get("prior.phi_a", s.phi_a);
    r.get("prior.phi_b", s.phi_b);
    const std::string cp = r.has("prior.changepoint") ? r.raw("prior.changepoint") : "none";
    if (cp == "dirichlet") {
      if (!r.has("prior.alpha")) r.fail("prior.changepoint", "a Dirichlet prior needs prior.alpha");
      s.changepoint = DirichletChangepoint{{r.list<double>("prior.alpha")}};
    } else if (cp == "fixed") {
      FixedChangepoint f;
      r.get("prior.fixed_year", f.year);
      s.changepoint = f;
    } else if (cp != "none") {
      r.fail("prior.changepoint", "expected dirichlet, fixed or none");
    }
    c.spec = s;
  } else {
    if (prior_keys)
      r.fail(r.keys_with_prefix("prior.").front(), "prior settings need `model = custom`");
    const int id = r.number<int>("model", model);
    if (id < 1 || id > 8) r.fail("model", "expected 1..8 or custom");
    c.spec = model_spec(id);
  }

  r.get("sampler.iterations", c.sampler.n_iterations);
  r.get("sampler.burn_in", c.sampler.burn_in);
  r.get("sampler.thinning", c.sampler.thinning);
  r.get("sampler.chains", c.sampler.n_chains);
  r.get("sampler.slice_width", c.sampler.slice.initial_width);
  r.get("sampler.max_doublings", c.sampler.slice.max_doublings);
  r.get("sampler.adapt_widths", c.sampler.adapt_widths);
  r.get("sampler.collapse_gamma", c.sampler.collapse_gamma);
  r.get("sampler.interweave", c.sampler.interweave);
  r.get("sampler.jitter_init", c.sampler.jitter_init);
  if (r.has("diagnostics.deviance")) {
    const std::string v = r.raw("diagnostics.deviance");
    if (v == "conditional") c.deviance = DevianceMode::conditional;
    else if (v == "marginal") c.deviance = DevianceMode::marginal;
    else r.fail("diagnostics.deviance", "expected conditional or marginal");
  }
  if (r.has("diagnostics.pvalue")) {
    const std::string v = r.raw("diagnostics.pvalue");
    if (v == "conditional") c.pvalue = PValueMode::conditional;
    else if (v == "mixed") c.pvalue = PValueMode::mixed;
    else r.fail("diagnostics.pvalue", "expected conditional or mixed");
  }
  r.get("summary.band_level", c.summary.band_level);
  r.check_all_used();

  // Structural checks that need no data.
  try {
    c.sampler.validate();
    c.spec.validate(c.panel.candidate_years);
    if (c.cohort) c.cohort->validate(c.panel);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!(c.summary.band_level > 0.0 && c.summary.band_level < 1.0))
    throw ConfigError(origin + ": summary.band_level must lie in (0, 1)");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

void apply_overrides(RunConfig& config, const Overrides& o) {
  if (o.seed) config.seed = o.seed;
  if (o.out) config.out = *o.out;
  if (o.model) {
    if (*o.model < 1 || *o.model > 8) throw ConfigError("--model must be in 1..8");
    config.spec = model_spec(*o.model);
    config.spec.validate(config.panel.candidate_years);
  }
}

}  // namespace bridgecp
