#include "qpbf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qpbf {

namespace {

using json = nlohmann::json;

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string short_num(double x) { return fmt("%g", x); }

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> number_list(const json& j, const char* key) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string("config: '") + key + "' must be a non-empty list");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument(std::string("config: '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SolverSpec parse_solver(const json& j) {
  SolverSpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
  } else if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (key == "name") s.name = value.get<std::string>();
      else if (key == "max_iterations") s.max_iterations = value.get<int>();
      else if (key == "init_iterations") s.init_iterations = value.get<int>();
      else if (key == "permutations") s.permutations = value.get<int>();
      else throw std::invalid_argument("config: unknown solver option '" + key + "'");
    }
  } else {
    throw std::invalid_argument("config: solver entries must be names or objects");
  }
  check_solver_name(s.name);
  return s;
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

std::string cell_key(const FactorSpec& s) {
  return "cr=" + short_num(s.cr) + ",sr=" + short_num(s.sr) + ",ug=" + short_num(s.ug);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void BenchConfig::validate() const {
  if (n < 2) throw std::invalid_argument("config: n must be at least 2");
  if (instances_per_cell < 1) throw std::invalid_argument("config: instances_per_cell must be positive");
  if (cr.empty() || sr.empty() || ug.empty()) throw std::invalid_argument("config: empty factor grid");
  if (solvers.empty()) throw std::invalid_argument("config: no solvers");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw std::invalid_argument("config: budget must be positive");
  if (workers < 0) throw std::invalid_argument("config: workers must be nonnegative");
  for (const auto& s : solvers) check_solver_name(s.name);
  for (const auto& inst : make_instances(*this)) inst.spec.validate();
}

BenchConfig parse_config(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  BenchConfig c;
  c.solvers.clear();
  bool have_solvers = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n") c.n = value.get<int>();
      else if (key == "instances_per_cell") c.instances_per_cell = value.get<int>();
      else if (key == "scale") c.scale = value.get<double>();
      else if (key == "budget") c.budget = value.get<double>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "grid") {
        for (const auto& [fk, fv] : value.items()) {
          if (fk == "cr") c.cr = number_list(fv, "cr");
          else if (fk == "sr") c.sr = number_list(fv, "sr");
          else if (fk == "ug") c.ug = number_list(fv, "ug");
          else throw std::invalid_argument("config: unknown factor '" + fk + "'");
        }
      } else if (key == "solvers") {
        if (!value.is_array()) throw std::invalid_argument("config: 'solvers' must be a list");
        for (const auto& s : value) c.solvers.push_back(parse_solver(s));
        have_solvers = true;
      } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!have_solvers)
    for (const auto& name : standard_solvers()) {
      SolverSpec s;
      s.name = name;
      c.solvers.push_back(s);
    }
  c.validate();
  return c;
}

BenchConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::invalid_argument("config: cannot read " + file.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Running

std::vector<Instance> make_instances(const BenchConfig& cfg) {
  std::vector<Instance> out;
  for (std::size_t a = 0; a < cfg.cr.size(); ++a)
    for (std::size_t b = 0; b < cfg.sr.size(); ++b)
      for (std::size_t c = 0; c < cfg.ug.size(); ++c)
        for (int k = 0; k < cfg.instances_per_cell; ++k) {
          FactorSpec s;
          s.n = cfg.n;
          s.cr = cfg.cr[a];
          s.sr = cfg.sr[b];
          s.ug = cfg.ug[c];
          s.scale = cfg.scale;
          s.seed = mix(cfg.seed ^ mix((a << 48) ^ (b << 32) ^ (c << 16) ^ static_cast<std::uint64_t>(k)));
          out.push_back({"cr" + short_num(s.cr) + "-sr" + short_num(s.sr) + "-ug" + short_num(s.ug) + "-" +
                             std::to_string(k),
                         s});
        }
  return out;
}

int worker_count(const BenchConfig& cfg) {
  int w = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::max(w, 1);
  if (const char* env = std::getenv("QPBF_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) w = std::min(w, cap);
  }
  return w;
}

BenchResult run_matrix(const BenchConfig& cfg, const std::function<void(const RunTrace&)>& on_done) {
  cfg.validate();
  BenchResult result;
  result.instances = make_instances(cfg);

  std::vector<Qpbf> functions;
  functions.reserve(result.instances.size());
  for (const auto& inst : result.instances) functions.push_back(generate(inst.spec));

  const std::size_t S = cfg.solvers.size();
  const std::size_t tasks = result.instances.size() * S;
  result.traces.resize(tasks);

  std::atomic<std::size_t> next{0};
  std::mutex collector;
  std::exception_ptr failure;

  auto work = [&]() {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      const std::size_t i = t / S, s = t % S;
      try {
        RunRequest req;
        req.instance = result.instances[i].id;
        req.seed = mix(result.instances[i].spec.seed + 1);
        req.budget = cfg.budget;
        RunTrace trace = run_solver(cfg.solvers[s], functions[i], req);
        std::lock_guard lock(collector);
        result.traces[t] = std::move(trace);
        if (on_done) on_done(result.traces[t]);
      } catch (...) {
        std::lock_guard lock(collector);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
      }
    }
  };

  const int workers = std::min<int>(worker_count(cfg), static_cast<int>(std::max<std::size_t>(tasks, 1)));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

// ---------------------------------------------------------------------------
// Aggregation

Factor parse_factor(const std::string& name) {
  if (name == "cr") return Factor::kCr;
  if (name == "sr") return Factor::kSr;
  if (name == "ug") return Factor::kUg;
  throw std::invalid_argument("unknown factor '" + name + "' (expected cr, sr or ug)");
}

std::string factor_name(Factor f) {
  switch (f) {
    case Factor::kCr: return "cr";
    case Factor::kSr: return "sr";
    case Factor::kUg: return "ug";
  }
  return "";
}

double factor_of(const FactorSpec& spec, Factor f) {
  switch (f) {
    case Factor::kCr: return spec.cr;
    case Factor::kSr: return spec.sr;
    case Factor::kUg: return spec.ug;
  }
  return 0.0;
}

double energy_at(const RunTrace& trace, double t) {
  if (trace.samples.empty()) throw std::invalid_argument("trace without samples");
  const auto it = std::upper_bound(trace.samples.begin(), trace.samples.end(), t,
                                   [](double x, const TraceSample& s) { return x < s.time; });
  return it == trace.samples.begin() ? trace.samples.front().energy : std::prev(it)->energy;
}

std::vector<double> log_grid(const std::vector<const RunTrace*>& traces, int points) {
  if (points < 2) throw std::invalid_argument("log_grid: need at least two points");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto* t : traces)
    for (const auto& s : t->samples) {
      if (s.time > 0.0) lo = std::min(lo, s.time);
      hi = std::max(hi, s.time);
    }
  lo = std::isfinite(lo) ? std::max(lo, 1e-6) : 1e-6;
  if (!(hi > lo)) hi = lo * 10.0;
  std::vector<double> grid(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < points; ++i) grid[i] = std::pow(10.0, a + (b - a) * i / (points - 1));
  grid.back() = hi;
  return grid;
}

std::vector<Curve> marginalize(const BenchResult& result, Factor factor, double value, std::vector<double> grid) {
  std::map<std::string, const FactorSpec*> spec_of;
  for (const auto& inst : result.instances) spec_of[inst.id] = &inst.spec;

  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunTrace*>> by_solver;
  std::vector<const RunTrace*> all;
  for (const auto& t : result.traces) {
    const auto it = spec_of.find(t.instance);
    if (it == spec_of.end() || !same_value(factor_of(*it->second, factor), value)) continue;
    if (!by_solver.count(t.solver)) order.push_back(t.solver);
    by_solver[t.solver].push_back(&t);
    all.push_back(&t);
  }
  if (all.empty())
    throw std::invalid_argument("no traces with " + factor_name(factor) + " = " + short_num(value));
  if (grid.empty()) grid = log_grid(all);

  std::vector<Curve> curves;
  for (const auto& name : order) {
    const auto& traces = by_solver[name];
    Curve c{name, grid, std::vector<double>(grid.size(), 0.0), traces.size()};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double sum = 0.0;
      for (const auto* t : traces) sum += energy_at(*t, grid[i]);
      c.energies[i] = sum / static_cast<double>(traces.size());
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::vector<Plot> factor_plots(const BenchConfig& cfg, const BenchResult& result) {
  std::vector<Plot> plots;
  for (Factor f : {Factor::kCr, Factor::kSr, Factor::kUg}) {
    const auto& values = f == Factor::kCr ? cfg.cr : f == Factor::kSr ? cfg.sr : cfg.ug;
    for (double v : values) {
      Plot p;
      p.name = factor_name(f) + "_" + short_num(v);
      p.curves = marginalize(result, f, v);
      p.title = factor_name(f) + " = " + short_num(v) + ", mean of " + std::to_string(p.curves.front().count) +
                " runs per solver";
      plots.push_back(std::move(p));
    }
  }
  return plots;
}

// ---------------------------------------------------------------------------
// Reports

std::string render_svg(const Plot& plot) {
  constexpr double W = 760, H = 460, L = 90, R = 190, T = 50, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  double emin = std::numeric_limits<double>::infinity(), emax = -std::numeric_limits<double>::infinity();
  for (const auto& c : plot.curves)
    for (std::size_t i = 0; i < c.times.size(); ++i) {
      tmin = std::min(tmin, std::max(c.times[i], 1e-9));
      tmax = std::max(tmax, c.times[i]);
      emin = std::min(emin, c.energies[i]);
      emax = std::max(emax, c.energies[i]);
    }
  if (!std::isfinite(tmin)) tmin = 1e-3, tmax = 1.0;
  if (!(tmax > tmin)) tmax = tmin * 10.0;
  if (!std::isfinite(emin)) emin = 0.0, emax = 1.0;
  if (!(emax > emin)) emin -= 1.0, emax += 1.0;
  const double pad = 0.05 * (emax - emin);
  emin -= pad;
  emax += pad;

  const double lx0 = std::log10(tmin), lx1 = std::log10(tmax);
  auto X = [&](double t) { return L + pw * (std::log10(std::max(t, tmin)) - lx0) / (lx1 - lx0); };
  auto Y = [&](double e) { return T + ph * (emax - e) / (emax - emin); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
     << "<text x=\"" << L + pw / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(plot.title)
     << "</text>\n"
     << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int d = static_cast<int>(std::ceil(lx0 - 1e-9)); d <= static_cast<int>(std::floor(lx1 + 1e-9)); ++d) {
    const double x = X(std::pow(10.0, d));
    os << "<line x1=\"" << x << "\" y1=\"" << T + ph << "\" x2=\"" << x << "\" y2=\"" << T + ph + 5
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << x << "\" y=\"" << T + ph + 19 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double e = emin + (emax - emin) * k / 5.0;
    const double y = Y(e);
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fmt("%.4g", e) << "</text>\n";
  }
  os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">time (s)</text>\n"
     << "<text x=\"20\" y=\"" << T + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << T + ph / 2
     << ")\">energy</text>\n";

  for (std::size_t i = 0; i < plot.curves.size(); ++i) {
    const auto& c = plot.curves[i];
    const char* color = palette[i % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < c.times.size(); ++k)
      os << (k ? " " : "") << fmt("%.2f", X(c.times[k])) << ',' << fmt("%.2f", Y(c.energies[k]));
    os << "\"/>\n";
    const double ly = T + 12 + 18.0 * i;
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(c.solver) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_reports(const std::vector<Plot>& plots, const BenchResult& result, const std::filesystem::path& dir) {
  if (plots.empty()) throw std::invalid_argument("emit_reports: no curves to plot");
  for (const auto& p : plots)
    if (p.curves.empty() || p.curves.front().times.empty())
      throw std::invalid_argument("emit_reports: plot '" + p.name + "' has no curves");
  if (result.traces.empty()) throw std::invalid_argument("emit_reports: no traces");

  std::ostringstream csv;
  csv << "solver,instance,time,energy\n";
  for (const auto& t : result.traces)
    for (const auto& s : t.samples)
      csv << t.solver << ',' << t.instance << ',' << fmt("%.9g", s.time) << ',' << fmt("%.17g", s.energy) << '\n';

  json summary;
  summary["instances"] = json::array();
  std::map<std::string, const FactorSpec*> spec_of;
  for (const auto& inst : result.instances) {
    spec_of[inst.id] = &inst.spec;
    summary["instances"].push_back({{"id", inst.id},
                                    {"n", inst.spec.n},
                                    {"cr", inst.spec.cr},
                                    {"sr", inst.spec.sr},
                                    {"ug", inst.spec.ug},
                                    {"scale", inst.spec.scale},
                                    {"seed", inst.spec.seed}});
  }

  struct Cell {
    std::vector<double> energies;
    std::vector<double> labeled;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;
  std::vector<std::pair<std::string, std::string>> cell_order;
  summary["runs"] = json::array();
  for (const auto& t : result.traces) {
    json run{{"solver", t.solver},   {"instance", t.instance},          {"seed", t.seed},
             {"energy", t.energy},   {"labeling", t.labeling.to_string()}, {"elapsed", t.elapsed},
             {"labeling_hash", t.labeling_hash()}};
    if (t.labeled_fraction) run["labeled_fraction"] = *t.labeled_fraction;
    summary["runs"].push_back(std::move(run));

    const auto it = spec_of.find(t.instance);
    const std::pair key{it == spec_of.end() ? std::string("?") : cell_key(*it->second), t.solver};
    if (!cells.count(key)) cell_order.push_back(key);
    cells[key].energies.push_back(t.energy);
    if (t.labeled_fraction) cells[key].labeled.push_back(*t.labeled_fraction);
  }
  summary["cells"] = json::array();
  for (const auto& key : cell_order) {
    const auto& c = cells[key];
    double sum = 0.0;
    for (double e : c.energies) sum += e;
    json cell{{"cell", key.first},
              {"solver", key.second},
              {"count", c.energies.size()},
              {"mean", sum / c.energies.size()},
              {"min", *std::min_element(c.energies.begin(), c.energies.end())},
              {"max", *std::max_element(c.energies.begin(), c.energies.end())}};
    if (!c.labeled.empty()) {
      double l = 0.0;
      for (double x : c.labeled) l += x;
      cell["labeled_fraction"] = l / c.labeled.size();
    }
    summary["cells"].push_back(std::move(cell));
  }

  std::vector<std::pair<std::string, std::string>> svgs;
  for (const auto& p : plots) svgs.emplace_back(p.name + ".svg", render_svg(p));

  std::filesystem::create_directories(dir);
  write_file(dir / "traces.csv", csv.str());
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  for (const auto& [name, text] : svgs) write_file(dir / name, text);
}

BenchResult load_results(const std::filesystem::path& dir) {
  BenchResult r;
  std::ifstream js(dir / "summary.json");
  if (!js) throw std::runtime_error("cannot read " + (dir / "summary.json").string());
  const json summary = json::parse(js);
  for (const auto& i : summary.at("instances")) {
    FactorSpec s;
    s.n = i.at("n").get<int>();
    s.cr = i.at("cr").get<double>();
    s.sr = i.at("sr").get<double>();
    s.ug = i.at("ug").get<double>();
    s.scale = i.at("scale").get<double>();
    s.seed = i.at("seed").get<std::uint64_t>();
    r.instances.push_back({i.at("id").get<std::string>(), s});
  }
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& run : summary.at("runs")) {
    RunTrace t;
    t.solver = run.at("solver").get<std::string>();
    t.instance = run.at("instance").get<std::string>();
    t.seed = run.at("seed").get<std::uint64_t>();
    t.energy = run.at("energy").get<double>();
    t.elapsed = run.at("elapsed").get<double>();
    t.labeling = Labeling::from_string(run.at("labeling").get<std::string>());
    if (run.contains("labeled_fraction")) t.labeled_fraction = run["labeled_fraction"].get<double>();
    index[{t.solver, t.instance}] = r.traces.size();
    r.traces.push_back(std::move(t));
  }

  std::ifstream cs(dir / "traces.csv");
  if (!cs) throw std::runtime_error("cannot read " + (dir / "traces.csv").string());
  std::string line;
  std::getline(cs, line);
  int lineno = 1;
  while (std::getline(cs, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string solver, instance, time, energy;
    if (!std::getline(ss, solver, ',') || !std::getline(ss, instance, ',') || !std::getline(ss, time, ',') ||
        !std::getline(ss, energy))
      throw std::runtime_error("traces.csv:" + std::to_string(lineno) + ": malformed row");
    const auto it = index.find({solver, instance});
    if (it == index.end()) throw std::runtime_error("traces.csv:" + std::to_string(lineno) + ": unknown run");
    r.traces[it->second].samples.push_back({std::stod(time), std::stod(energy)});
  }
  return r;
}

}  // namespace qpbf
