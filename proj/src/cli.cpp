#include "spw/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spw/bench.hpp"
#include "spw/detail/parallel.hpp"
#include "spw/error.hpp"
#include "spw/gradfit.hpp"
#include "spw/io.hpp"
#include "spw/sampler.hpp"
#include "spw/spectra.hpp"
#include "spw/stats.hpp"
#include "spw/svg.hpp"

namespace spw::cli {
namespace {

// Dense oracle guard for validate and bench: entries of G per draw.
constexpr std::size_t kDenseLimit = 20'000'000;

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(out);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write(os);
  if (!os) throw Error("failed writing " + path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text;
}

SpikeSpec spec_of(const RunConfig& c) { return SpikeSpec(c.m, c.n, c.spikes); }

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
  return s;
}

// Column index (zero-based) for a statistic name: a 1-based index or "last".
std::size_t stat_column(const std::string& name, std::size_t columns) {
  if (name == "last") return columns - 1;
  std::size_t idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoul(name, &used);
    if (used != name.size()) idx = 0;
  } catch (const std::exception&) {
    idx = 0;
  }
  require(idx >= 1 && idx <= columns, "--stats entry '" + name + "' must be 'last' or in [1, " +
                                           std::to_string(columns) + "]");
  return idx - 1;
}

std::vector<std::vector<double>> sample_values(const SpikeSpec& spec, const RunConfig& c, std::size_t columns) {
  std::vector<std::vector<double>> rows(c.draws);
  const RandomStream base(c.seed);
  detail::parallel_for(c.draws, c.threads, [&](std::size_t i) {
    RandomStream stream = base.substream(i);
    const BandedSample h = sample_banded(spec, stream);
    auto d = c.top ? top_svd(h, *c.top).singular_values : full_svd(h, false).singular_values;
    d.resize(columns);
    rows[i] = std::move(d);
  });
  return rows;
}

}  // namespace

int cmd_sample(const RunConfig& c, std::ostream& out, std::ostream&) {
  const SpikeSpec spec = spec_of(c);
  require(c.draws >= 1, "--draws must be >= 1");
  if (c.top) require(*c.top >= 1 && *c.top <= spec.block_cols(), "--top must be in [1, min(m, n)]");
  require(c.bins >= 1, "--bins must be >= 1");
  require(c.dump_format == "triplet" || c.dump_format == "dense", "--dump-format must be triplet or dense");
  const std::size_t columns = c.top ? *c.top : spec.block_cols();
  std::vector<std::size_t> stat_cols;
  for (const auto& s : c.stats) stat_cols.push_back(stat_column(s, columns));

  const auto rows = sample_values(spec, c, columns);

  io::Table table;
  for (std::size_t l = 0; l < columns; ++l) table.header.push_back("d" + std::to_string(l + 1));
  table.rows = rows;
  emit(c.out, out, [&](std::ostream& os) {
    if (c.format == Format::csv) {
      io::write_csv(os, table);
    } else {
      nlohmann::ordered_json j;
      j["m"] = c.m;
      j["n"] = c.n;
      j["spikes"] = spec.spikes();
      j["seed"] = c.seed;
      j["columns"] = table.header;
      j["draws"] = rows;
      os << j.dump(2) << '\n';
    }
  });

  if (!c.svg_prefix.empty()) {
    for (std::size_t col : stat_cols) {
      std::vector<double> x;
      for (const auto& r : rows) x.push_back(r[col]);
      const std::string name = "d" + std::to_string(col + 1);
      svg::Axes axes{name + " over " + std::to_string(c.draws) + " draws", name, "count"};
      write_text(c.svg_prefix + "_" + name + ".svg", svg::histogram_plot(axes, {{"efficient", histogram(x, c.bins)}}));
    }
  }
  if (!c.means_out.empty()) {
    io::Table means{{"mean"}, {}};
    for (std::size_t l = 0; l < columns; ++l) {
      double acc = 0.0;
      for (const auto& r : rows) acc += r[l];
      means.rows.push_back({acc / static_cast<double>(rows.size())});
    }
    io::write_csv_file(c.means_out, means);
  }
  if (!c.dump_h.empty()) {
    RandomStream first = RandomStream(c.seed).substream(0);
    const BandedSample h = sample_banded(spec, first);
    emit(c.dump_h, out, [&](std::ostream& os) {
      if (c.dump_format == "triplet") {
        write_triplets(os, h);
      } else {
        write_dense_csv(os, h);
      }
    });
  }
  return kExitOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream&) {
  const SpikeSpec spec = spec_of(c);
  require(c.draws >= 1, "--draws must be >= 1");
  require(c.threshold > 0.0 && c.threshold < 1.0, "--threshold must be in (0, 1)");
  require(spec.m() * spec.n() <= kDenseLimit, "validate: m * n too large for the dense oracle");
  const std::size_t last = spec.block_cols() - 1;

  SampleOptions opts;
  opts.df_shift = c.inject_df_shift;
  const RandomStream eff(c.seed, 1), dense(c.seed, 2);
  std::vector<double> top_e(c.draws), top_d(c.draws), low_e(c.draws), low_d(c.draws);
  detail::parallel_for(c.draws, c.threads, [&](std::size_t i) {
    RandomStream a = eff.substream(i), b = dense.substream(i);
    const auto se = full_svd(sample_banded(spec, a, opts), false).singular_values;
    const auto sd = dense_singular_values(sample_dense(spec, b));
    top_e[i] = se.front();
    low_e[i] = se[last];
    top_d[i] = sd.front();
    low_d[i] = sd[last];
  });
  const KsResult top = ks_two_sample(top_e, top_d);
  const KsResult low = ks_two_sample(low_e, low_d);
  const bool pass = top.p_value > c.threshold && low.p_value > c.threshold;

  emit(c.out, out, [&](std::ostream& os) {
    if (c.format == Format::csv) {
      auto row = [&](const char* name, const KsResult& r) {
        os << name << ',' << io::format_double(r.d_statistic) << ',' << io::format_double(r.p_value) << ','
           << (r.p_value > c.threshold ? "pass" : "fail") << '\n';
      };
      os << "statistic,D,p,result\n";
      row("top", top);
      row("bottom", low);
    } else {
      nlohmann::ordered_json j;
      j["m"] = c.m;
      j["n"] = c.n;
      j["spikes"] = spec.spikes();
      j["draws"] = c.draws;
      j["seed"] = c.seed;
      j["threshold"] = c.threshold;
      j["top"] = {{"D", top.d_statistic}, {"p", top.p_value}};
      j["bottom"] = {{"D", low.d_statistic}, {"p", low.p_value}};
      j["pass"] = pass;
      os << j.dump(2) << '\n';
    }
  });

  if (!c.svg_prefix.empty()) {
    auto overlay = [&](const std::string& which, const std::vector<double>& e, const std::vector<double>& d) {
      std::vector<double> all = e;
      all.insert(all.end(), d.begin(), d.end());
      const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
      std::vector<double> edges(c.bins + 1);
      const double width = *hi > *lo ? *hi - *lo : 1.0;
      for (std::size_t b = 0; b <= c.bins; ++b) edges[b] = *lo + width * static_cast<double>(b) / static_cast<double>(c.bins);
      edges.back() = std::max(*hi, edges.back());
      svg::Axes axes{which + " singular value", "d", "count"};
      write_text(c.svg_prefix + "_" + which + ".svg",
                 svg::histogram_plot(axes, {{"efficient (H)", histogram(e, edges)}, {"dense (G)", histogram(d, edges)}}));
    };
    overlay("top", top_e, top_d);
    overlay("bottom", low_e, low_d);
  }
  return pass ? kExitOk : kExitFailure;
}

int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream&) {
  require(!c.grid.empty(), "--grid needs at least one m value");
  require(c.draws >= 1, "--draws must be >= 1");
  require(c.reps >= 1, "--reps must be >= 1");
  std::vector<BenchMethod> methods;
  for (const auto& name : c.methods) {
    if (name == "efficient") methods.push_back(BenchMethod::efficient);
    else if (name == "dense") methods.push_back(BenchMethod::dense);
    else throw DomainError("unknown method '" + name + "'");
  }
  require(!methods.empty(), "--methods needs at least one method");
  std::size_t top = c.top.value_or(c.coupled ? 3 : 0);

  struct Row {
    std::size_t m, n;
    BenchMethod method;
    BenchTiming t;
  };
  std::vector<Row> rows;
  for (std::size_t m : c.grid) {
    const std::size_t n = c.coupled ? m : c.n;
    const SpikeSpec spec(m, n, c.spikes);
    if (top) require(top <= spec.block_cols(), "--top exceeds min(m, n) at m = " + std::to_string(m));
    for (BenchMethod method : methods) {
      if (method == BenchMethod::dense) require(m * n <= kDenseLimit, "bench: m * n too large for the dense method");
      rows.push_back({m, n, method, time_method(spec, method, c.draws, top, c.seed, c.reps)});
    }
  }

  emit(c.out, out, [&](std::ostream& os) {
    os << "m,n,method,draws,seconds,checksum\n";
    for (const auto& r : rows) {
      os << r.m << ',' << r.n << ',' << to_string(r.method) << ',' << c.draws << ',' << io::format_double(r.t.seconds)
         << ',' << io::format_double(r.t.checksum) << '\n';
    }
  });
  if (!c.svg_prefix.empty()) {
    std::vector<svg::Series> series;
    for (BenchMethod method : methods) {
      svg::Series s{to_string(method), {}, {}, true};
      for (const auto& r : rows) {
        if (r.method != method) continue;
        s.x.push_back(static_cast<double>(r.m));
        s.y.push_back(std::max(r.t.seconds, 1e-9));
      }
      series.push_back(std::move(s));
    }
    const std::string title = c.coupled ? "wall time, m = n" : "wall time, n = " + std::to_string(c.n);
    svg::Axes axes{title, "m", "seconds for " + std::to_string(c.draws) + " draws", true, true};
    write_text(c.svg_prefix, svg::line_plot(axes, series));
  }
  return kExitOk;
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require(!c.target.empty(), "--target is required");
  require(!c.init.empty(), "--init needs at least one spike");
  require(c.batch >= 1, "--batch must be >= 1");
  const std::vector<double> target = io::read_vector_file(c.target);
  const SpikeSpec tmpl(c.m, c.n, c.init);
  require(target.size() <= tmpl.block_cols(), "target has " + std::to_string(target.size()) +
                                                  " values but min(m, n) = " + std::to_string(tmpl.block_cols()));
  FitOptions opts;
  opts.batch = c.batch;
  opts.max_iters = c.max_iters;
  opts.fresh_noise = c.fresh_noise;
  opts.threads = c.threads;
  const FitReport report = fit_spikes(target, tmpl, c.init, RandomStream(c.seed), opts);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';

  emit(c.out, out, [&](std::ostream& os) { os << fit_report_json(report) << '\n'; });
  if (!c.svg_prefix.empty()) {
    svg::Series t{"target", {}, report.target, true}, f{"fitted means", {}, report.final_means, false};
    for (std::size_t l = 0; l < report.target.size(); ++l) {
      t.x.push_back(static_cast<double>(l + 1));
      f.x.push_back(static_cast<double>(l + 1));
    }
    svg::Axes axes{"mean singular values, spikes " + join(report.final_spikes), "index", "d"};
    write_text(c.svg_prefix, svg::line_plot(axes, {t, f}));
  }
  return kExitOk;
}

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  try {
    return io::parse_double_list(text);
  } catch (const DomainError&) {
    throw DomainError(flag + ": expected a comma-separated list of numbers, got '" + text + "'");
  }
}

std::vector<std::string> parse_names(const std::string& text) {
  std::vector<std::string> out;
  for (auto& s : io::split_csv_line(text)) {
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw DomainError("--format must be csv or json");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling, validation and fitting for spiked Wishart singular values", "spw"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  RunConfig c;
  std::string spikes_text, format_text = "csv", stats_text = "1", grid_text = "100,1000,10000,100000";
  std::string methods_text = "efficient,dense", init_text;
  std::size_t top = 0;

  auto add_spec = [&](CLI::App* sub, bool need_size, bool with_m = true) {
    CLI::Option* m = with_m ? sub->add_option("--m", c.m, "Number of variables (rows of G)") : nullptr;
    auto* n = sub->add_option("--n", c.n, "Number of observations (columns of G)");
    if (need_size) {
      m->required();
      n->required();
    }
    sub->add_option("--spikes", spikes_text, "Spike standard deviations, e.g. 100,30,10");
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  };

  auto* sample = app.add_subcommand("sample", "Per-draw singular values of the efficient sampler");
  add_spec(sample, true);
  sample->add_option("--draws", c.draws, "Number of draws")->capture_default_str();
  sample->add_option("--top", top, "Only the top ell singular values (iterative solver)");
  sample->add_option("--out", c.out, "Output table ('-' = stdout)")->capture_default_str();
  sample->add_option("--format", format_text, "csv or json")->capture_default_str();
  sample->add_option("--svg", c.svg_prefix, "Write one histogram per statistic to PREFIX_d<i>.svg");
  sample->add_option("--stats", stats_text, "Columns to histogram: 1-based indices or 'last'")->capture_default_str();
  sample->add_option("--bins", c.bins, "Histogram bins")->capture_default_str();
  sample->add_option("--means-out", c.means_out, "Write the column means as a one-column CSV");
  sample->add_option("--dump-h", c.dump_h, "Write the first draw of H");
  sample->add_option("--dump-format", c.dump_format, "triplet or dense")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "KS comparison of the efficient and dense samplers");
  add_spec(validate, false);
  validate->add_option("--draws", c.draws, "Draws per sampler (default 2000)");
  validate->add_option("--threshold", c.threshold, "Minimum p-value to pass")->capture_default_str();
  validate->add_option("--out", c.out, "Report ('-' = stdout)")->capture_default_str();
  validate->add_option("--format", format_text, "csv or json")->capture_default_str();
  validate->add_option("--svg", c.svg_prefix, "Write overlaid histograms to PREFIX_top.svg and PREFIX_bottom.svg");
  validate->add_option("--bins", c.bins, "Histogram bins")->capture_default_str();
  validate->add_option("--inject-df-shift", c.inject_df_shift)->group("");

  auto* bench = app.add_subcommand("bench", "Wall time of both samplers over a grid of m");
  add_spec(bench, false, false);
  bench->add_option("--grid", grid_text, "Values of m")->capture_default_str();
  bench->add_option("--draws", c.draws, "Draws per timing (default 100)");
  bench->add_option("--top", top, "Top ell singular values for the efficient method (default: all, or 3 with --coupled)");
  bench->add_flag("--coupled", c.coupled, "Set n = m at every grid point");
  bench->add_option("--reps", c.reps, "Repetitions; the median is reported")->capture_default_str();
  bench->add_option("--methods", methods_text, "efficient,dense")->capture_default_str();
  bench->add_option("--out", c.out, "CSV output ('-' = stdout)")->capture_default_str();
  bench->add_option("--svg", c.svg_prefix, "Log-log plot of the timings");

  auto* fit = app.add_subcommand("fit", "Fit spikes to target mean singular values");
  add_spec(fit, true);
  fit->add_option("--target", c.target, "File of descending target values")->required();
  fit->add_option("--init", init_text, "Initial spikes, e.g. 2,2,2")->required();
  fit->add_option("--batch", c.batch, "Noise batch size")->capture_default_str();
  fit->add_option("--max-iters", c.max_iters, "Iteration cap")->capture_default_str();
  fit->add_flag("--fresh-noise", c.fresh_noise, "Redraw the noise batch on every step");
  fit->add_option("--out", c.out, "FitReport JSON ('-' = stdout)")->capture_default_str();
  fit->add_option("--svg", c.svg_prefix, "Overlay of target and fitted means");

  std::vector<std::string> argv_store{"spw"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; everything else is a usage error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    c.spikes = parse_list(spikes_text, "--spikes");
    c.format = parse_format(format_text);
    if (top) c.top = top;
    if (sample->parsed()) {
      c.command = "sample";
      c.stats = parse_names(stats_text);
      return cmd_sample(c, out, err);
    }
    if (validate->parsed()) {
      c.command = "validate";
      if (validate->count("--m") == 0) c.m = 50;
      if (validate->count("--n") == 0) c.n = 40;
      if (validate->count("--spikes") == 0) c.spikes = {10.0, 3.0};
      if (validate->count("--draws") == 0) c.draws = 2000;
      return cmd_validate(c, out, err);
    }
    if (bench->parsed()) {
      c.command = "bench";
      if (bench->count("--n") == 0) c.n = 10;
      if (bench->count("--spikes") == 0) c.spikes = {100.0, 30.0, 10.0};
      if (bench->count("--draws") == 0) c.draws = 100;
      c.grid.clear();
      for (double v : parse_list(grid_text, "--grid")) {
        require(v >= 1 && v == std::floor(v) && v < 1e12, "--grid values must be positive integers");
        c.grid.push_back(static_cast<std::size_t>(v));
      }
      c.methods = parse_names(methods_text);
      return cmd_bench(c, out, err);
    }
    c.command = "fit";
    c.init = parse_list(init_text, "--init");
    return cmd_fit(c, out, err);
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace spw::cli
