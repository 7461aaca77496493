#include "edm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "edm/lagrange.hpp"
#include "edm/series.hpp"
#include "json.hpp"

namespace edm::cli {

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_number(const char* spec, double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Round-trip decimal form for machine-readable output.
std::string exact(double v) { return format_number("%.17g", v); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string family_token(Family family) { return lower(to_string(family)); }

std::string baseline_label(BaselineModel model) {
  if (model == BaselineModel::Poisson) return "Poisson";
  std::string s(to_token(model));
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::string_view command_name(Command c) {
  switch (c) {
    case Command::Stats: return "stats";
    case Command::Fit: return "fit";
    case Command::Compare: return "compare";
    case Command::Pmf: return "pmf";
    case Command::Measure: return "measure";
    case Command::Validate: return "validate";
  }
  return "";
}

std::string_view method_name(FitMethod m) { return m == FitMethod::MLE ? "mle" : "moments"; }

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t left_aligned = 1;  // leading text columns
};

void write_aligned(std::ostream& out, const TextTable& t) {
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t i = 0; i < width.size(); ++i) width[i] = t.header[i].size();
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string pad(width[i] - cells[i].size(), ' ');
      if (i > 0) s += "  ";
      s += i < t.left_aligned ? cells[i] + pad : pad + cells[i];
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    out << s << '\n';
  };
  line(t.header);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& row : t.rows) line(row);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

void write_csv(std::ostream& out, const TextTable& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << "\r\n";
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
}

void write_table(std::ostream& out, const TextTable& t, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    write_csv(out, t);
  } else {
    write_aligned(out, t);
  }
}

// Display precision for tables, round-trip precision for csv.
struct NumberStyle {
  bool exact_digits;
  std::string operator()(double v, const char* display) const {
    return exact_digits ? exact(v) : format_number(display, v);
  }
};

json config_json(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  j["data"] = c.data_path.empty() ? json(nullptr) : json(c.data_path.string());
  j["family"] = c.family ? json(family_token(*c.family)) : json(nullptr);
  j["r"] = c.r ? json(*c.r) : json(nullptr);
  j["p"] = c.p ? json(*c.p) : json(nullptr);
  j["m"] = c.m ? json(*c.m) : json(nullptr);
  j["r_range"] = {c.r_min, c.r_max};
  json models = json::array();
  for (auto m : c.models) models.push_back(to_token(m));
  j["models"] = models;
  j["pool_threshold"] = c.pool_threshold;
  j["n_max"] = c.n_max ? json(*c.n_max) : json(nullptr);
  j["method"] = method_name(c.method);
  return j;
}

json gof_json(const GofReport& g) {
  json cells = json::array();
  for (const auto& c : g.pooled_cells) {
    cells.push_back({{"cell", c.label()}, {"observed", c.observed}, {"expected", c.expected}});
  }
  return {{"chi2", g.chi2}, {"df", g.df},   {"p_value", g.p_value},
          {"rmse", g.rmse}, {"kl", g.kl},   {"cells", cells}};
}

json row_json(const ModelRow& row) {
  json j;
  j["model"] = row.label;
  j["family"] = row.family;
  j["r"] = row.r ? json(*row.r) : json(nullptr);
  j["method"] = method_name(row.method);
  if (row.error.empty()) {
    json params = json::object();
    for (const auto& [name, v] : row.params) params[name] = v;
    j["params"] = params;
    j["m_hat"] = row.m_hat;
    j["log_likelihood"] = row.log_likelihood;
    j["n_params"] = row.n_params;
    j["gof"] = row.gof ? gof_json(*row.gof) : json(nullptr);
    j["error"] = nullptr;
  } else {
    j["params"] = nullptr;
    j["m_hat"] = nullptr;
    j["log_likelihood"] = nullptr;
    j["n_params"] = nullptr;
    j["gof"] = nullptr;
    j["error"] = row.error;
  }
  return j;
}

TextTable rows_table(const std::vector<ModelRow>& rows, OutputFormat format) {
  const NumberStyle num{format == OutputFormat::Csv};
  TextTable t;
  if (format == OutputFormat::Csv) {
    t.header = {"model", "family", "r", "method", "parameters", "m_hat", "log_likelihood",
                "n_params", "chi2", "df", "p_value", "rmse", "kl", "error"};
    for (const auto& row : rows) {
      std::string params;
      for (const auto& [name, v] : row.params) {
        params += (params.empty() ? "" : ";") + name + "=" + exact(v);
      }
      const bool ok = row.error.empty();
      const bool g = ok && row.gof.has_value();
      t.rows.push_back({row.label, row.family, row.r ? std::to_string(*row.r) : "",
                        std::string(method_name(row.method)), params,
                        ok ? exact(row.m_hat) : "", ok ? exact(row.log_likelihood) : "",
                        ok ? std::to_string(row.n_params) : "",
                        g ? exact(row.gof->chi2) : "", g ? std::to_string(row.gof->df) : "",
                        g ? exact(row.gof->p_value) : "", g ? exact(row.gof->rmse) : "",
                        g ? exact(row.gof->kl) : "", row.error});
    }
    return t;
  }
  t.header = {"model", "parameters", "loglik", "chi2", "df", "p-value", "RMSE", "KL"};
  t.left_aligned = 2;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      t.rows.push_back({row.label, "failed: " + row.error, "-", "-", "-", "-", "-", "-"});
      continue;
    }
    std::string params;
    for (const auto& [name, v] : row.params) {
      params += (params.empty() ? "" : " ") + name + "=" + num(v, "%.6g");
    }
    const auto& g = row.gof;
    t.rows.push_back({row.label, params, num(row.log_likelihood, "%.4f"),
                      g ? num(g->chi2, "%.6f") : "-", g ? std::to_string(g->df) : "-",
                      g ? num(g->p_value, "%.6f") : "-", g ? num(g->rmse, "%.6f") : "-",
                      g ? num(g->kl, "%.4e") : "-"});
  }
  return t;
}

FrequencyTable load_data(const RunConfig& c) {
  if (c.data_path.empty()) throw UsageError("--data is required");
  return read_frequency_csv(c.data_path);
}

ModelRow make_row(const FitResult& f, std::string family, std::optional<int> r,
                  const FrequencyTable& data, double pool_threshold) {
  ModelRow row;
  row.label = f.label();
  row.family = std::move(family);
  row.r = r;
  row.method = f.method;
  if (const auto* s = std::get_if<ModelSpec>(&f.spec)) {
    if (s->r() > 0) row.params.emplace_back("p", s->p());
    row.params.emplace_back("m", f.m_hat);
    if (s->r() == 0) row.label = s->label();
  } else {
    const auto& b = std::get<BaselineSpec>(f.spec);
    const auto names = parameter_names(b.model());
    for (std::size_t i = 0; i < names.size(); ++i) row.params.emplace_back(names[i], b.param(i));
  }
  row.m_hat = f.m_hat;
  row.log_likelihood = f.log_likelihood;
  row.n_params = f.n_params;
  row.gof = evaluate_gof(data, f.probabilities(static_cast<std::size_t>(data.max_value())),
                         f.n_params, pool_threshold);
  return row;
}

// ---- commands ----

int cmd_stats(const RunConfig& c, std::ostream& out) {
  const auto data = load_data(c);
  const auto d = descriptive(data);
  const std::vector<std::pair<std::string, double>> fields{
      {"n_obs", static_cast<double>(d.n_obs)},
      {"mean", d.mean},
      {"variance", d.variance},
      {"skewness", d.skewness},
      {"kurtosis", d.kurtosis},
      {"fraction_zeros", d.fraction_zeros},
      {"dispersion_index", d.dispersion_index}};
  if (c.format == OutputFormat::Json) {
    json stats;
    stats["n_obs"] = d.n_obs;
    for (std::size_t i = 1; i < fields.size(); ++i) stats[fields[i].first] = fields[i].second;
    out << json{{"config", config_json(c)}, {"stats", stats}}.dump(2) << '\n';
    return kExitOk;
  }
  const NumberStyle num{c.format == OutputFormat::Csv};
  TextTable t{{"statistic", "value"}, {}, 1};
  t.rows.push_back({"n_obs", std::to_string(d.n_obs)});
  for (std::size_t i = 1; i < fields.size(); ++i) {
    t.rows.push_back({fields[i].first, num(fields[i].second, "%.7g")});
  }
  write_table(out, t, c.format);
  return kExitOk;
}

void write_rows(const RunConfig& c, const std::vector<ModelRow>& rows, std::ostream& out) {
  if (c.format == OutputFormat::Json) {
    json list = json::array();
    for (const auto& row : rows) list.push_back(row_json(row));
    out << json{{"config", config_json(c)}, {"results", list}}.dump(2) << '\n';
  } else {
    write_table(out, rows_table(rows, c.format), c.format);
  }
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  const auto data = load_data(c);
  ModelRow row;
  if (!c.models.empty()) {
    if (c.models.size() != 1) throw UsageError("fit takes a single baseline model");
    row = fit_baseline_row(c.models.front(), data, c.pool_threshold);
  } else {
    if (!c.family || !c.r) throw UsageError("fit needs --family and --r, or --models");
    row = fit_edm_row(*c.family, *c.r, c.method, data, c.pool_threshold);
  }
  write_rows(c, {row}, out);
  if (c.format == OutputFormat::Table && row.gof) {
    out << '\n';
    TextTable cells{{"cell", "observed", "expected"}, {}, 1};
    for (const auto& cell : row.gof->pooled_cells) {
      cells.rows.push_back({cell.label(), format_number("%.0f", cell.observed),
                            format_number("%.4f", cell.expected)});
    }
    write_aligned(out, cells);
  }
  return kExitOk;
}

int cmd_compare(const RunConfig& c, std::ostream& out) {
  const auto data = load_data(c);
  write_rows(c, compare_rows(c, data), out);
  return kExitOk;
}

int cmd_pmf(const RunConfig& c, std::ostream& out) {
  std::vector<double> probs;
  std::vector<double> log_probs;
  if (!c.models.empty()) {
    if (c.models.size() != 1) throw UsageError("pmf takes a single baseline model");
    probs = baseline_pmf(BaselineSpec(c.models.front(), c.params), c.n_max.value_or(20));
    for (double v : probs) log_probs.push_back(std::log(v));
  } else {
    if (!c.family || !c.r || !c.p || !c.m) {
      throw UsageError("pmf needs --family, --r, --p and --m, or --models with --params");
    }
    const ModelSpec spec(*c.family, *c.r, *c.p);
    const CountDistribution dist =
        c.n_max ? pmf(spec, *c.m, *c.n_max) : pmf_adaptive(spec, *c.m, c.pmf_options);
    probs = dist.probabilities();
    log_probs = dist.log_pmf;
  }
  if (c.format == OutputFormat::Json) {
    out << json{{"config", config_json(c)}, {"probabilities", probs}, {"log_pmf", log_probs}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  const NumberStyle num{c.format == OutputFormat::Csv};
  TextTable t{{"n", "probability", "log_pmf"}, {}, 0};
  for (std::size_t n = 0; n < probs.size(); ++n) {
    t.rows.push_back({std::to_string(n), num(probs[n], "%.10e"), num(log_probs[n], "%.10f")});
  }
  write_table(out, t, c.format);
  return kExitOk;
}

int cmd_measure(const RunConfig& c, std::ostream& out) {
  if (!c.family || !c.r || !c.p) throw UsageError("measure needs --family, --r and --p");
  const ModelSpec spec(*c.family, *c.r, *c.p);
  const auto measure = generating_measure(spec, c.n_max.value_or(20), c.algorithm);
  std::vector<double> log_mu;
  for (std::size_t n = 0; n < measure.log_scaled.size(); ++n) {
    log_mu.push_back(measure.log_scaled[n] + static_cast<double>(n) * std::log(spec.p()));
  }
  if (c.format == OutputFormat::Json) {
    json j{{"config", config_json(c)},
           {"algorithm", c.algorithm == MeasureAlgorithm::Recurrence ? "recurrence" : "lagrange"},
           {"log_scaled", measure.log_scaled},
           {"log_mu_star", log_mu}};
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  const NumberStyle num{c.format == OutputFormat::Csv};
  TextTable t{{"n", "mu_star", "log_mu_star", "log_scaled"}, {}, 0};
  for (std::size_t n = 0; n < log_mu.size(); ++n) {
    t.rows.push_back({std::to_string(n), num(std::exp(log_mu[n]), "%.10e"),
                      num(log_mu[n], "%.10f"), num(measure.log_scaled[n], "%.10f")});
  }
  write_table(out, t, c.format);
  return kExitOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  const auto checks = validation_suite(c.perturb);
  const bool all = std::all_of(checks.begin(), checks.end(), [](const auto& k) { return k.passed; });
  if (c.format == OutputFormat::Json) {
    json list = json::array();
    for (const auto& k : checks) {
      list.push_back({{"module", k.module},
                      {"check", k.name},
                      {"max_deviation", k.max_deviation},
                      {"tolerance", k.tolerance},
                      {"passed", k.passed}});
    }
    out << json{{"config", config_json(c)}, {"checks", list}, {"passed", all}}.dump(2) << '\n';
  } else {
    const NumberStyle num{c.format == OutputFormat::Csv};
    TextTable t{{"status", "module", "check", "max_deviation", "tolerance"}, {}, 3};
    for (const auto& k : checks) {
      t.rows.push_back({k.passed ? "PASS" : "FAIL", k.module, k.name,
                        num(k.max_deviation, "%.3e"), num(k.tolerance, "%.1e")});
    }
    write_table(out, t, c.format);
  }
  return all ? kExitOk : kExitNumerical;
}

// ---- argument parsing ----

std::pair<int, int> parse_r_range(const std::string& s) {
  const auto dots = s.find("..");
  int a = 0, b = 0;
  try {
    if (dots == std::string::npos) {
      a = b = std::stoi(s);
    } else {
      a = std::stoi(s.substr(0, dots));
      b = std::stoi(s.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw UsageError("--r-range expects A..B, got '" + s + "'");
  }
  if (a < 0 || b < a || b > kDefaultMaxPower) {
    throw UsageError("--r-range must satisfy 0 <= A <= B <= " + std::to_string(kDefaultMaxPower));
  }
  return {a, b};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct RawOptions {
  std::string data;
  std::string family;
  std::optional<int> r;
  std::optional<double> p;
  std::optional<double> m;
  std::string r_range;
  std::optional<std::string> models;
  std::string params;
  double pool_threshold = 1.0;
  std::optional<long long> n_max;
  std::string format = "table";
  std::string method = "mle";
  std::string algorithm = "recurrence";
  std::optional<double> term_tol;
  std::optional<double> mass_tol;
  std::optional<long long> hard_cap;
  std::string perturb;
};

RunConfig to_config(Command command, const RawOptions& raw) {
  RunConfig c;
  c.command = command;
  c.data_path = raw.data;

  const std::string fam = lower(raw.family);
  if (fam.empty() || fam == "both") {
    c.family.reset();
  } else if (fam == "none") {
    if (command != Command::Compare) throw UsageError("--family none is only valid for compare");
    c.include_edm = false;
  } else {
    try {
      c.family = parse_family(fam);
    } catch (const Error&) {
      throw UsageError("--family must be abm or lm, got '" + raw.family + "'");
    }
  }
  c.r = raw.r;
  if (c.r && (*c.r < 0 || *c.r > kDefaultMaxPower)) {
    throw UsageError("--r must lie in 0.." + std::to_string(kDefaultMaxPower));
  }
  c.p = raw.p;
  c.m = raw.m;
  if (!raw.r_range.empty()) std::tie(c.r_min, c.r_max) = parse_r_range(raw.r_range);

  if (raw.models) {
    for (const auto& token : split_list(*raw.models)) {
      if (lower(token) == "none") continue;
      try {
        c.models.push_back(parse_baseline(lower(token)));
      } catch (const Error&) {
        throw UsageError("unknown model '" + token + "'");
      }
    }
  } else if (command == Command::Compare) {
    c.models = default_compare_models();
  }
  for (const auto& v : split_list(raw.params)) {
    try {
      c.params.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw UsageError("--params expects numbers, got '" + v + "'");
    }
  }

  if (!(raw.pool_threshold >= 0.0)) throw UsageError("--pool-threshold must be >= 0");
  c.pool_threshold = raw.pool_threshold;
  if (raw.n_max) {
    if (*raw.n_max < 0 || *raw.n_max > 1000000) throw UsageError("--n-max must lie in 0..1000000");
    c.n_max = static_cast<std::size_t>(*raw.n_max);
  }

  const std::string fmt = lower(raw.format);
  if (fmt == "table") {
    c.format = OutputFormat::Table;
  } else if (fmt == "csv") {
    c.format = OutputFormat::Csv;
  } else if (fmt == "json") {
    c.format = OutputFormat::Json;
  } else {
    throw UsageError("--format must be table, csv or json");
  }

  const std::string method = lower(raw.method);
  if (method == "mle") {
    c.method = FitMethod::MLE;
  } else if (method == "moments") {
    c.method = FitMethod::Moments;
  } else {
    throw UsageError("--method must be mle or moments");
  }

  const std::string algorithm = lower(raw.algorithm);
  if (algorithm == "recurrence") {
    c.algorithm = MeasureAlgorithm::Recurrence;
  } else if (algorithm == "lagrange") {
    c.algorithm = MeasureAlgorithm::Lagrange;
  } else {
    throw UsageError("--algorithm must be recurrence or lagrange");
  }

  if (raw.term_tol) {
    if (!(*raw.term_tol > 0.0)) throw UsageError("--term-tol must be > 0");
    c.pmf_options.term_tolerance = *raw.term_tol;
  }
  if (raw.mass_tol) {
    if (!(*raw.mass_tol > 0.0)) throw UsageError("--mass-tol must be > 0");
    c.pmf_options.mass_tolerance = *raw.mass_tol;
  }
  if (raw.hard_cap) {
    if (*raw.hard_cap < 1 || *raw.hard_cap > 1000000) throw UsageError("--hard-cap must lie in 1..1000000");
    c.pmf_options.hard_cap = static_cast<std::size_t>(*raw.hard_cap);
  }

  if (!raw.perturb.empty()) {
    static const std::vector<std::string> modules{"series", "edm_core", "lagrange", "baselines"};
    if (std::find(modules.begin(), modules.end(), raw.perturb) == modules.end()) {
      throw UsageError("--perturb must name one of series, edm_core, lagrange, baselines");
    }
    c.perturb = raw.perturb;
  }
  return c;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyData:
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateValue:
    case ErrorCode::NegativeCount:
      return kExitData;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidParameters:
    case ErrorCode::MeanOutOfDomain:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

std::vector<BaselineModel> default_compare_models() {
  return {BaselineModel::PIG, BaselineModel::NLD, BaselineModel::PLB, BaselineModel::GDP,
          BaselineModel::BTD};
}

ModelRow fit_edm_row(Family family, int r, FitMethod method, const FrequencyTable& data,
                     double pool_threshold) {
  const FitResult f =
      method == FitMethod::MLE ? fit_mle(family, r, data) : fit_moments(family, r, data);
  return make_row(f, family_token(family), r, data, pool_threshold);
}

ModelRow fit_baseline_row(BaselineModel model, const FrequencyTable& data,
                          double pool_threshold) {
  return make_row(fit_baseline(model, data), std::string(to_token(model)), std::nullopt, data,
                  pool_threshold);
}

std::vector<ModelRow> compare_rows(const RunConfig& config, const FrequencyTable& data) {
  struct Job {
    ModelRow stub;
    std::function<ModelRow()> run;
  };
  std::vector<Job> jobs;
  if (config.include_edm) {
    std::vector<Family> families;
    if (config.family) {
      families = {*config.family};
    } else {
      families = {Family::ABM, Family::LM};
    }
    for (auto family : families) {
      for (int r = config.r_min; r <= config.r_max; ++r) {
        ModelRow stub;
        stub.label = ModelSpec(family, r, 1.0).label();
        stub.family = family_token(family);
        stub.r = r;
        stub.method = config.method;
        jobs.push_back({stub, [=, &data] {
                          return fit_edm_row(family, r, config.method, data,
                                             config.pool_threshold);
                        }});
      }
    }
  }
  for (auto model : config.models) {
    ModelRow stub;
    stub.label = baseline_label(model);
    stub.family = std::string(to_token(model));
    jobs.push_back(
        {stub, [=, &data] { return fit_baseline_row(model, data, config.pool_threshold); }});
  }

  std::vector<ModelRow> rows(jobs.size());
  if (jobs.empty()) return rows;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        rows[i] = jobs[i].run();
      } catch (const Error& e) {
        rows[i] = jobs[i].stub;
        rows[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1,
                                                      jobs.size());
  std::vector<std::future<void>> pending;
  for (std::size_t t = 0; t < threads; ++t) pending.push_back(std::async(std::launch::async, worker));
  for (auto& f : pending) f.get();
  return rows;
}

std::vector<ValidationCheck> validation_suite(const std::string& perturb) {
  std::vector<ValidationCheck> checks;
  auto add = [&](const std::string& module, std::string name, double dev, double tol) {
    if (module == perturb) dev += 1e-2;
    checks.push_back({module, std::move(name), dev, tol, dev <= tol});
  };
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
  };

  // series
  {
    const auto e = ps_exp(TruncatedSeries{0.0, 2.0, -0.5, 0.0}, 3);
    const std::vector<double> want{1.0, 2.0, 1.5, 1.0 / 3.0};
    double dev = 0.0;
    for (std::size_t k = 0; k < want.size(); ++k) dev = std::max(dev, std::abs(e[k] - want[k]));
    add("series", "exp(2m - m^2/2) coefficients", dev, 1e-15);

    const TruncatedSeries a{0.3, 1.0, -0.5, 0.25, 0.125, -0.2, 0.1};
    const auto back = ps_log(ps_exp(a, 6), 6);
    dev = 0.0;
    for (std::size_t k = 0; k <= 6; ++k) dev = std::max(dev, std::abs(back[k] - a[k]));
    add("series", "log(exp(a)) round trip", dev, 1e-13);
  }

  // edm_core
  {
    double dev = 0.0;
    for (auto family : {Family::ABM, Family::LM}) {
      for (int r : {0, 1, 3, 10}) {
        const ModelSpec spec(family, r, 1.0);
        const auto a = generating_measure(spec, 120, MeasureAlgorithm::Recurrence);
        const auto b = generating_measure(spec, 120, MeasureAlgorithm::Lagrange);
        for (std::size_t n = 0; n <= 120; ++n) {
          dev = std::max(dev, std::abs(std::expm1(a.log_scaled[n] - b.log_scaled[n])));
        }
      }
    }
    add("edm_core", "measure recurrence vs coefficient extraction, n <= 120", dev, 1e-10);

    dev = 0.0;
    for (auto [r, p] : std::vector<std::pair<int, double>>{{2, 0.5}, {2, 1.0}, {3, 1.0}}) {
      const auto est = estimate_total_mass(ModelSpec(Family::ABM, r, p));
      dev = std::max(dev, rel(est.extrapolated, std::exp(p / (r - 1))));
    }
    add("edm_core", "total mass e^(p/(r-1)) for ABM (2,0.5) (2,1) (3,1)", dev, 1e-3);

    dev = 0.0;
    double violations = 0.0;
    for (auto family : {Family::ABM, Family::LM}) {
      for (double p : {0.25, 1.0, 4.0}) {
        for (double frac : {0.05, 0.15, 0.3}) {
          double prev = -1.0;
          for (int r = 0; r <= 10; ++r) {
            const ModelSpec spec(family, r, p);
            const auto pr = pmf_adaptive(spec, frac * p).probabilities();
            double total = 0.0;
            for (double v : pr) total += v;
            dev = std::max(dev, std::abs(total - 1.0));
            const double z = zero_prob(spec, frac * p);
            if (!(z > prev)) violations += 1.0;
            prev = z;
          }
        }
      }
    }
    add("edm_core", "pmf sums to 1 over r <= 10, p in {0.25,1,4}", dev, 1e-8);
    add("edm_core", "zero probability strictly increasing in r", violations, 0.0);
  }

  // lagrange
  {
    const auto nu1 = nu_measure(1, 15);
    add("lagrange",
        "nu(3) = " + format_number("%.15g", nu1(3)) + " for r=1, p=1 (3^1/3! = 0.5)",
        std::abs(nu1(3) - 0.5), 1e-15);

    double dev = 0.0;
    for (int n = 1; n <= 15; ++n) {
      dev = std::max(dev, rel(nu1(n), std::pow(n, n - 2) / std::tgamma(n + 1.0)));
    }
    add("lagrange", "nu(n) = n^(n-2)/n! for r=1, n <= 15", dev, 1e-12);

    const auto nu2 = nu_measure(2, 12);
    dev = 0.0;
    for (int n = 1; n <= 12; ++n) dev = std::max(dev, rel(hermite_nu(n), nu2(n)));
    add("lagrange", "Hermite closed form of nu for r=2, n <= 12", dev, 1e-10);

    dev = 0.0;
    for (int r : {1, 2}) {
      const auto nu = nu_measure(r, 15);
      for (double p : {0.5, 1.0, 2.0}) {
        const auto mu = conv_exponential(nu, p, 15);
        const auto g = generating_measure(ModelSpec(Family::LM, r, p), 15);
        for (std::size_t n = 0; n <= 15; ++n) dev = std::max(dev, rel(mu[n], g.mu_star(n)));
      }
    }
    add("lagrange", "e^(p nu) equals the LM measure, r in {1,2}, n <= 15", dev, 1e-9);
  }

  // baselines
  {
    struct Grid {
      BaselineModel model;
      std::vector<std::vector<double>> points;
      std::size_t n_max;
    };
    const std::vector<Grid> grids{
        {BaselineModel::NLD, {{0.95, 0.2}, {0.5, 0.5}, {-1.0, 0.3}, {0.9, 0.9}, {-5.0, 0.7}}, 2000},
        {BaselineModel::GDP, {{0.58, 3.05}, {0.3, 0.0}, {0.9, 1.0}, {1.0, 2.5}, {0.7, 5.0}}, 200000},
        {BaselineModel::BTD, {{0.35, 0.18}, {1.0, 1.0}, {0.1, 3.0}, {2.0, 0.5}, {0.5, 5.0}}, 150},
    };
    for (const auto& g : grids) {
      double dev = 0.0;
      for (const auto& v : g.points) {
        double total = 0.0;
        for (double x : baseline_pmf(BaselineSpec(g.model, v), g.n_max)) total += x;
        dev = std::max(dev, std::abs(total - 1.0));
      }
      add("baselines", baseline_label(g.model) + " pmf sums to 1 on a 5-point grid", dev, 1e-9);
    }
  }
  return checks;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit ABM and LM exponential dispersion models to count data", "edmcount"};
  app.require_subcommand(1);
  RawOptions raw;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", raw.format, "table, csv or json");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", raw.data, "CSV file with header value,frequency")->required();
  };
  auto add_pool = [&](CLI::App* sub) {
    sub->add_option("--pool-threshold", raw.pool_threshold,
                    "minimum expected count per pooled cell");
  };

  auto* stats = app.add_subcommand("stats", "descriptive statistics of a frequency table");
  add_data(stats);
  add_format(stats);

  auto* fit = app.add_subcommand("fit", "fit one model and report goodness of fit");
  add_data(fit);
  fit->add_option("--family", raw.family, "abm or lm");
  fit->add_option("--r", raw.r, "power of the variance function");
  fit->add_option("--models", raw.models, "a single baseline model instead of ABM/LM");
  fit->add_option("--method", raw.method, "mle or moments");
  add_pool(fit);
  add_format(fit);

  auto* compare = app.add_subcommand("compare", "fit ABM/LM over a range of r plus baselines");
  add_data(compare);
  compare->add_option("--family", raw.family, "abm, lm, both (default) or none");
  compare->add_option("--r-range", raw.r_range, "A..B (default 1..10)");
  compare->add_option("--models", raw.models,
                      "comma-separated baselines (default pig,nld,plb,gdp,btd; none for no baselines)");
  compare->add_option("--method", raw.method, "mle or moments for ABM/LM");
  add_pool(compare);
  add_format(compare);

  auto* pmf_cmd = app.add_subcommand("pmf", "probability mass function");
  pmf_cmd->add_option("--family", raw.family, "abm or lm");
  pmf_cmd->add_option("--r", raw.r, "power of the variance function");
  pmf_cmd->add_option("--p", raw.p, "dispersion parameter");
  pmf_cmd->add_option("--m", raw.m, "mean");
  pmf_cmd->add_option("--models", raw.models, "a single baseline model instead of ABM/LM");
  pmf_cmd->add_option("--params", raw.params, "comma-separated baseline parameters");
  pmf_cmd->add_option("--n-max", raw.n_max, "largest count (default adaptive)");
  pmf_cmd->add_option("--term-tol", raw.term_tol, "adaptive stop: term tolerance");
  pmf_cmd->add_option("--mass-tol", raw.mass_tol, "adaptive stop: uncaptured mass tolerance");
  pmf_cmd->add_option("--hard-cap", raw.hard_cap, "adaptive stop: largest n_max");
  add_format(pmf_cmd);

  auto* measure = app.add_subcommand("measure", "generating measure mu*_n");
  measure->add_option("--family", raw.family, "abm or lm");
  measure->add_option("--r", raw.r, "power of the variance function");
  measure->add_option("--p", raw.p, "dispersion parameter");
  measure->add_option("--n-max", raw.n_max, "largest n (default 20)");
  measure->add_option("--algorithm", raw.algorithm, "recurrence or lagrange");
  add_format(measure);

  auto* validate = app.add_subcommand("validate", "run the cross-module oracle suite");
  validate->add_option("--perturb", raw.perturb, "test hook: inflate deviations of a module");
  add_format(validate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  Command command = Command::Stats;
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "fit") command = Command::Fit;
  if (name == "compare") command = Command::Compare;
  if (name == "pmf") command = Command::Pmf;
  if (name == "measure") command = Command::Measure;
  if (name == "validate") command = Command::Validate;

  try {
    const RunConfig config = to_config(command, raw);
    switch (command) {
      case Command::Stats: return cmd_stats(config, out);
      case Command::Fit: return cmd_fit(config, out);
      case Command::Compare: return cmd_compare(config, out);
      case Command::Pmf: return cmd_pmf(config, out);
      case Command::Measure: return cmd_measure(config, out);
      case Command::Validate: return cmd_validate(config, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kExitOk;
}

}  // namespace edm::cli
