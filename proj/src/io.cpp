#include "bridgecp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bridgecp {

namespace {

using json = nlohmann::ordered_json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& text, int row, const std::string& column) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && end[-1] == ' ') --end;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end)
    throw DataError("row " + std::to_string(row) + ", column " + column + ": '" + text +
                    "' is not a valid " + (std::is_integral_v<T> ? "integer" : "number"));
  return value;
}

std::vector<std::string> read_header(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(what) + " is empty: header row required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Tolerate a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  return split_csv_line(line);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Panel read_panel_csv(std::istream& in, const PanelOptions& options) {
  const auto header = read_header(in, "panel file");
  std::vector<std::size_t> col(kPanelColumns.size());
  for (std::size_t k = 0; k < kPanelColumns.size(); ++k) {
    auto it = std::find(header.begin(), header.end(), kPanelColumns[k]);
    if (it == header.end()) throw DataError("row 1: missing column '" + kPanelColumns[k] + "'");
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<ChargeRecord> records;
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(f.size()));
    ChargeRecord r;
    r.youth_id = f[col[0]];
    r.year = parse_number<int>(f[col[1]], row, "year");
    r.age = parse_number<double>(f[col[2]], row, "age");
    r.repeat_offense = parse_number<int>(f[col[3]], row, "repeat_offense");
    r.severe = parse_number<int>(f[col[4]], row, "severe");
    r.outcome = parse_number<int>(f[col[5]], row, "outcome");
    r.source_row = row;
    records.push_back(std::move(r));
  }
  return Panel(std::move(records), options);
}

Panel load_panel(const std::filesystem::path& path, const PanelOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open panel file " + path.string());
  return read_panel_csv(in, options);
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
  for (std::size_t k = 0; k < kPanelColumns.size(); ++k) out << (k ? "," : "") << kPanelColumns[k];
  out << '\n';
  for (const auto& r : panel.records())
    out << r.youth_id << ',' << r.year << ',' << format_double(r.age) << ',' << r.repeat_offense << ','
        << r.severe << ',' << r.outcome << '\n';
}

void save_panel(const std::filesystem::path& path, const Panel& panel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write panel file " + path.string());
  write_panel_csv(out, panel);
  if (!out) throw std::runtime_error("failed writing panel file " + path.string());
}

std::size_t CohortShape::n_clusters() const {
  std::size_t n = 0;
  for (auto [size, count] : cluster_sizes) n += static_cast<std::size_t>(count);
  return n;
}

std::size_t CohortShape::n_records() const {
  std::size_t n = 0;
  for (auto [size, count] : cluster_sizes) n += static_cast<std::size_t>(size) * count;
  return n;
}

void CohortShape::validate(const PanelOptions& options) const {
  for (auto [size, count] : cluster_sizes) {
    if (size < 1) throw std::invalid_argument("cluster size must be positive");
    if (count < 0) throw std::invalid_argument("cluster count must be non-negative");
    if (options.strict && size < 2 && count > 0)
      throw std::invalid_argument("strict panels need cluster sizes >= 2");
  }
  if (n_clusters() == 0) throw std::invalid_argument("cohort shape has no clusters");
  if (!(age_sd >= 0.0) || !(age_min > 0.0) || !(age_max >= age_min))
    throw std::invalid_argument("invalid age law");
  for (double p : {p_severe_first, p_severe_repeat, gap_p})
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probabilities must lie in [0, 1]");
  if (!(gap_p > 0.0)) throw std::invalid_argument("gap_p must be positive");
  const auto years = static_cast<std::size_t>(options.last_year - options.first_year + 1);
  if (!first_year_weights.empty()) {
    if (first_year_weights.size() != years)
      throw std::invalid_argument("first_year_weights needs one weight per window year");
    double total = 0.0;
    for (double w : first_year_weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("year weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("year weights sum to zero");
  }
}

TrueParams default_truth() {
  TrueParams t;
  t.beta1 = {{"intercept", 1.45},  {"age", std::log(1.15)},   {"repeat_offense", std::log(0.604)},
             {"severe", std::log(1.506)}, {"year", std::log(1.155)}, {"notification", 0.0}};
  t.beta2 = {{"cp_indicator", std::log(0.256)}, {"cp_linear", 0.0}, {"cp_quadratic", 0.0},
             {"cp_repeat", std::log(1.872)}};
  t.phi = 0.8;
  t.T = 1995;
  return t;
}

ChainState truth_state(const TrueParams& truth, const Panel& panel, std::vector<double> B) {
  ChainState s;
  for (const auto& name : panel.x1_names()) {
    auto it = truth.beta1.find(name);
    s.beta1.push_back(it == truth.beta1.end() ? 0.0 : it->second);
  }
  if (truth.T) {
    for (const auto& name : Panel::x2_names()) {
      auto it = truth.beta2.find(name);
      s.beta2.push_back(it == truth.beta2.end() ? 0.0 : it->second);
    }
  }
  s.phi = truth.phi;
  s.T = truth.T;
  s.B = std::move(B);
  return s;
}

Cohort generate_cohort(const CohortShape& shape, const TrueParams& truth, std::uint64_t seed,
                       const PanelOptions& options) {
  shape.validate(options);
  const auto names1 = x1_names(options.design);
  for (const auto& [name, v] : truth.beta1)
    if (v != 0.0 && std::find(names1.begin(), names1.end(), name) == names1.end())
      throw std::invalid_argument("truth names unknown coefficient '" + name + "'");
  for (const auto& [name, v] : truth.beta2)
    if (v != 0.0 &&
        std::find(Panel::x2_names().begin(), Panel::x2_names().end(), name) == Panel::x2_names().end())
      throw std::invalid_argument("truth names unknown change-point coefficient '" + name + "'");
  Rng rng(seed);
  const BridgeParam phi(truth.phi);
  const int span_years = options.last_year - options.first_year + 1;
  std::vector<double> weights = shape.first_year_weights;
  if (weights.empty()) {
    weights.resize(static_cast<std::size_t>(span_years));
    for (int k = 0; k < span_years; ++k) {
      const int y = options.first_year + k;
      weights[static_cast<std::size_t>(k)] = y < 1995 ? 0.40 / 7.0 : (y < 2000 ? 0.30 / 5.0 : 0.30 / 6.0);
    }
  }

  std::vector<ChargeRecord> records;
  std::size_t id = 0;
  for (auto [size, count] : shape.cluster_sizes) {
    for (int c = 0; c < count; ++c) {
      ++id;
      char name[16];
      std::snprintf(name, sizeof name, "Y%04zu", id);
      int year = options.first_year + static_cast<int>(rng.categorical(weights));
      double age = shape.first_age_mean + shape.age_sd * rng.normal();
      age = std::round(std::clamp(age, shape.age_min, shape.age_max) * 10.0) / 10.0;
      const int first_year = year;
      for (int j = 0; j < size; ++j) {
        if (j > 0) {
          int gap = 0;
          while (rng.uniform() > shape.gap_p) ++gap;
          year = std::min(options.last_year, year + gap);
        }
        ChargeRecord r;
        r.youth_id = name;
        r.year = year;
        r.age = std::min(shape.age_max, age + (year - first_year));
        r.repeat_offense = j > 0 ? 1 : 0;
        r.severe = rng.bernoulli(j > 0 ? shape.p_severe_repeat : shape.p_severe_first);
        records.push_back(std::move(r));
      }
    }
  }
  Panel structure(std::move(records), options);

  std::vector<double> B(structure.n_clusters());
  for (double& b : B) b = bridge_draw(phi, rng);
  ChainState state = truth_state(truth, structure, B);
  if (state.T) structure.candidate_index(*state.T);
  const auto y = simulate_outcomes(state, structure, rng);
  return Cohort{structure.with_outcomes(y), truth, std::move(B), seed};
}

std::string truth_json(const Cohort& cohort) {
  json j;
  j["seed"] = cohort.seed;
  j["phi"] = cohort.truth.phi;
  j["T"] = cohort.truth.T ? json(*cohort.truth.T) : json(nullptr);
  json b1 = json::object();
  for (const auto& [k, v] : cohort.truth.beta1) b1[k] = v;
  json b2 = json::object();
  for (const auto& [k, v] : cohort.truth.beta2) b2[k] = v;
  j["beta1"] = b1;
  j["beta2"] = b2;
  json clusters = json::array();
  for (std::size_t i = 0; i < cohort.B.size(); ++i)
    clusters.push_back({{"youth_id", cohort.panel.clusters()[i].youth_id}, {"B", cohort.B[i]}});
  j["n_clusters"] = cohort.panel.n_clusters();
  j["n_records"] = cohort.panel.n_records();
  j["random_effects"] = clusters;
  return j.dump(2) + "\n";
}

TrueParams parse_truth_json(const std::string& text, std::vector<double>* B) {
  const json j = json::parse(text);
  TrueParams t;
  t.beta1.clear();
  t.beta2.clear();
  t.phi = j.at("phi").get<double>();
  t.T = j.at("T").is_null() ? std::nullopt : std::optional<int>(j.at("T").get<int>());
  for (const auto& [k, v] : j.at("beta1").items()) t.beta1[k] = v.get<double>();
  for (const auto& [k, v] : j.at("beta2").items()) t.beta2[k] = v.get<double>();
  if (B) {
    B->clear();
    for (const auto& c : j.at("random_effects")) B->push_back(c.at("B").get<double>());
  }
  return t;
}

std::vector<std::string> draws_columns(const PosteriorDraws& draws) {
  std::vector<std::string> cols{"chain", "iteration"};
  for (const auto& n : draws.beta1_names) cols.push_back(n);
  for (const auto& n : draws.beta2_names) cols.push_back(n);
  cols.push_back("phi");
  if (draws.has_changepoint) cols.push_back("T");
  if (draws.has_gamma)
    for (int y : draws.candidate_years) cols.push_back("gamma_" + std::to_string(y));
  const std::size_t n_b = draws.draws.empty() ? 0 : draws.draws.front().state.B.size();
  for (std::size_t i = 0; i < n_b; ++i) cols.push_back("B_" + std::to_string(i + 1));
  cols.push_back("log_likelihood");
  return cols;
}

void write_draws(std::ostream& out, const PosteriorDraws& draws) {
  const auto cols = draws_columns(draws);
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  std::string row;
  for (const auto& d : draws.draws) {
    row.clear();
    row += std::to_string(d.chain) + ',' + std::to_string(d.iteration);
    for (double v : d.state.beta1) row += ',' + g17(v);
    for (double v : d.state.beta2) row += ',' + g17(v);
    row += ',' + g17(d.state.phi);
    if (draws.has_changepoint) row += ',' + std::to_string(*d.state.T);
    if (draws.has_gamma)
      for (double v : d.state.gamma) row += ',' + g17(v);
    for (double v : d.state.B) row += ',' + g17(v);
    row += ',' + g17(d.log_likelihood);
    out << row << '\n';
  }
}

PosteriorDraws read_draws(std::istream& in, const Panel& panel) {
  const auto header = read_header(in, "draws file");
  PosteriorDraws out;
  out.candidate_years = panel.candidate_years();
  out.n_obs = panel.n_records();
  std::size_t k = 2;
  if (header.size() < 4 || header[0] != "chain" || header[1] != "iteration")
    throw DataError("draws file: unrecognized header");
  for (; k < header.size() && header[k] != "phi"; ++k) {
    const auto& x2 = Panel::x2_names();
    if (std::find(x2.begin(), x2.end(), header[k]) != x2.end())
      out.beta2_names.push_back(header[k]);
    else
      out.beta1_names.push_back(header[k]);
  }
  if (k == header.size()) throw DataError("draws file: no phi column");
  if (out.beta1_names != panel.x1_names())
    throw DataError("draws file: coefficient columns do not match the panel design");
  ++k;
  if (k < header.size() && header[k] == "T") {
    out.has_changepoint = true;
    ++k;
  }
  std::size_t n_gamma = 0;
  while (k < header.size() && header[k].rfind("gamma_", 0) == 0) ++n_gamma, ++k;
  out.has_gamma = n_gamma > 0;
  if (out.has_gamma && n_gamma != out.candidate_years.size())
    throw DataError("draws file: gamma columns do not match the candidate years");
  std::size_t n_b = 0;
  while (k < header.size() && header[k].rfind("B_", 0) == 0) ++n_b, ++k;
  if (n_b != panel.n_clusters()) throw DataError("draws file: random-effect columns do not match the panel");
  if (k + 1 != header.size() || header[k] != "log_likelihood")
    throw DataError("draws file: expected log_likelihood as the last column");

  std::string line;
  int row = 1;
  std::size_t max_chain = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw DataError("draws file row " + std::to_string(row) + ": wrong field count");
    Draw d;
    std::size_t c = 0;
    d.chain = parse_number<std::size_t>(f[c++], row, "chain");
    d.iteration = parse_number<std::size_t>(f[c++], row, "iteration");
    for (std::size_t j = 0; j < out.beta1_names.size(); ++j)
      d.state.beta1.push_back(parse_number<double>(f[c++], row, out.beta1_names[j]));
    for (std::size_t j = 0; j < out.beta2_names.size(); ++j)
      d.state.beta2.push_back(parse_number<double>(f[c++], row, out.beta2_names[j]));
    d.state.phi = parse_number<double>(f[c++], row, "phi");
    if (out.has_changepoint) d.state.T = parse_number<int>(f[c++], row, "T");
    for (std::size_t j = 0; j < n_gamma; ++j) d.state.gamma.push_back(parse_number<double>(f[c++], row, "gamma"));
    for (std::size_t j = 0; j < n_b; ++j) d.state.B.push_back(parse_number<double>(f[c++], row, "B"));
    d.log_likelihood = parse_number<double>(f[c++], row, "log_likelihood");
    max_chain = std::max(max_chain, d.chain);
    const auto dens = observation_log_densities(d.state, panel);
    out.obs_log_density.insert(out.obs_log_density.end(), dens.begin(), dens.end());
    out.draws.push_back(std::move(d));
  }
  out.n_chains = out.draws.empty() ? 0 : max_chain + 1;
  return out;
}

}  // namespace bridgecp
