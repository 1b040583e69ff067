#include "streamthin/harness.hpp"

#include "streamthin/scrambler.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace streamthin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

// Locale-independent line-per-candidate trace sink.
class TraceWriter {
public:
    explicit TraceWriter(const std::string& path) {
        if (path.empty()) return;
        out_.open(path, std::ios::out | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open trace file: " + path);
        out_ << "k,selected,n_k,score,threshold,phi\n";
    }
    bool active() const { return out_.is_open(); }
    void row(long long k, bool selected, long long n_k, double score, double threshold,
             double phi) {
        if (!out_.is_open()) return;
        line_.clear();
        line_ += std::to_string(k);
        line_ += selected ? ",1," : ",0,";
        line_ += std::to_string(n_k);
        line_ += ',';
        line_ += format_double(score);
        line_ += ',';
        line_ += format_double(threshold);
        line_ += ',';
        line_ += format_double(phi);
        line_ += '\n';
        out_ << line_;
    }

private:
    std::ofstream out_;
    std::string line_;
};

std::vector<long long> probe_grid(long long n_total, int count) {
    std::vector<long long> grid;
    if (count <= 0 || n_total <= 0) return grid;
    const double hi = std::log10(static_cast<double>(n_total));
    long long prev = 0;
    for (int i = 0; i <= count; ++i) {
        double t = hi * static_cast<double>(i) / static_cast<double>(count);
        long long k = std::llround(std::pow(10.0, t));
        k = std::clamp<long long>(k, 1, n_total);
        if (k > prev) {
            grid.push_back(k);
            prev = k;
        }
    }
    if (grid.empty() || grid.back() != n_total) grid.push_back(n_total);
    return grid;
}

long long derive_quota(const RunConfig& cfg, long long n_total) {
    if (cfg.n > 0) return cfg.n;
    return static_cast<long long>(std::floor(cfg.alpha * static_cast<double>(n_total) + 1e-9));
}

}  // namespace

OracleResult oracle_for(const std::string& name, double alpha, const StreamSpec& stream) {
    if (name == "quad-normal") return oracle_quad_normal(alpha);
    if (name == "multilinear-normal") {
        const auto* src = std::get_if<NormalIid>(&stream.source);
        if (!src) {
            throw std::invalid_argument("multilinear-normal oracle needs a normal:d=... stream");
        }
        return oracle_multilinear_normal(alpha, src->d);
    }
    if (name == "mixture") return oracle_mixture_normal_discrete(alpha);
    if (name == "three-spheres") {
        const auto* src = std::get_if<ThreeSpheres>(&stream.source);
        ThreeSpheres ts = src ? *src : ThreeSpheres{};
        return oracle_three_spheres(alpha, ts.d, ts.r1, ts.r2, ts.r3);
    }
    if (name == "quad01-design") return oracle_quad01_design(alpha);
    if (name == "uniform-square") return oracle_uniform_square(alpha);
    throw std::invalid_argument("unknown oracle: " + name);
}

RunSummary run_experiment(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Stream stream(cfg.stream);
    const long long n_total = stream.size();
    const int p = stream.feature_dim();
    const CriterionSpec crit{CriterionKind::LogDet, 1.0, p};
    const double alpha_eff =
        cfg.n > 0 ? static_cast<double>(cfg.n) / static_cast<double>(n_total) : cfg.alpha;

    RunSummary sum;
    sum.method = cfg.method;
    sum.alpha_effective = alpha_eff;
    if (!cfg.oracle.empty()) sum.oracle = oracle_for(cfg.oracle, alpha_eff, cfg.stream);
    const Eigen::MatrixXd* m_star =
        (sum.oracle && sum.oracle->m_star) ? &*sum.oracle->m_star : nullptr;
    if (m_star && m_star->rows() != p) {
        throw std::invalid_argument("oracle matrix dimension does not match the model");
    }

    TraceWriter trace(cfg.trace_path);
    const std::vector<long long> grid = probe_grid(n_total, cfg.probe_count);
    std::size_t next_probe = 0;

    std::optional<ScrambleBuffer<Eigen::VectorXd>> scramble;
    if (cfg.scramble_buffer > 1) {
        scramble.emplace(static_cast<std::size_t>(cfg.scramble_buffer),
                         Rng::substream(cfg.stream.seed, 0x9e3779b97f4a7c15ULL));
    }

    auto probe = [&](long long k, double cur_phi, const Eigen::MatrixXd& m) {
        if (next_probe >= grid.size() || k < grid[next_probe]) return;
        ProbeRecord pr;
        pr.k = k;
        pr.phi = cur_phi;
        if (m_star) {
            pr.err_fro = (m - *m_star).norm();
            if (std::isfinite(cur_phi)) {
                pr.efficiency = std::exp((cur_phi - sum.oracle->phi_star) / p);
            }
        }
        sum.probes.push_back(pr);
        while (next_probe < grid.size() && grid[next_probe] <= k) ++next_probe;
    };

    if (cfg.method == Method::Thinner) {
        ThinnerConfig tc;
        tc.criterion = crit;
        tc.alpha = alpha_eff;
        tc.eps1 = cfg.eps1;
        tc.k0 = cfg.k0;
        tc.seed = cfg.stream.seed;
        tc.quantile.alpha = alpha_eff;
        tc.quantile.q_exp = cfg.q_exp;
        tc.quantile.gamma = cfg.gamma;
        tc.quantile.beta_floor = cfg.beta_floor;
        switch (cfg.mode) {
            case QuotaMode::Fixed:
                tc.mode = FixedAlpha{};
                break;
            case QuotaMode::Force:
                tc.mode = TruncateForce{derive_quota(cfg, n_total), n_total};
                break;
            case QuotaMode::Adaptive:
                tc.mode = AdaptiveAlpha{derive_quota(cfg, n_total), n_total};
                break;
        }
        Thinner thinner(tc);

        auto process = [&](const Eigen::VectorXd& raw) {
            Decision dec = thinner.observe(RankOne{stream.features(raw), 1.0});
            if (cfg.keep_selected && dec.selected) sum.selected_raw.push_back(raw);
            trace.row(dec.k, dec.selected, thinner.n_selected(), dec.score, dec.threshold,
                      dec.phi_after);
            probe(dec.k, dec.phi_after, thinner.info().m);
        };
        Eigen::VectorXd raw;
        while (stream.next(raw)) {
            if (scramble) {
                if (auto out = scramble->next(raw)) process(*out);
            } else {
                process(raw);
            }
        }
        if (scramble) {
            while (auto out = scramble->next(std::nullopt)) process(*out);
        }
        sum.n_seen = thinner.seen();
        sum.n_selected = thinner.n_selected();
        sum.final_phi = thinner.phi();
        sum.final_threshold = thinner.threshold();
        sum.final_m = thinner.info().m;
    } else if (cfg.method == Method::Exchange) {
        const long long n_active = derive_quota(cfg, n_total);
        Exchange ex(p, n_active, cfg.exchange_rule);
        double cur_phi = -std::numeric_limits<double>::infinity();

        auto process = [&](const Eigen::VectorXd& raw) {
            bool changed = ex.consider(stream.features(raw));
            if (changed) cur_phi = ex.phi();
            trace.row(ex.seen(), changed, ex.size(), kNaN, kNaN, cur_phi);
            probe(ex.seen(), cur_phi, ex.info().m);
        };
        Eigen::VectorXd raw;
        while (stream.next(raw)) {
            if (scramble) {
                if (auto out = scramble->next(raw)) process(*out);
            } else {
                process(raw);
            }
        }
        if (scramble) {
            while (auto out = scramble->next(std::nullopt)) process(*out);
        }
        sum.n_seen = ex.seen();
        sum.n_selected = ex.size();
        sum.final_phi = ex.phi();
        sum.final_m = ex.info().m;
    } else {
        // Batch extreme-coordinate selection over the whole stream.
        std::vector<Eigen::VectorXd> raws;
        raws.reserve(static_cast<std::size_t>(n_total));
        Eigen::VectorXd raw;
        while (stream.next(raw)) raws.push_back(raw);
        const long long n_sel = derive_quota(cfg, n_total);
        std::vector<std::size_t> idx = iboss_select(raws, n_sel);
        std::vector<char> flag(raws.size(), 0);
        for (std::size_t i : idx) flag[i] = 1;

        InfoState st(p);
        long long cum = 0;
        for (std::size_t i = 0; i < raws.size(); ++i) {
            if (flag[i]) {
                ++cum;
                select_update(crit, st, RankOne{stream.features(raws[i]), 1.0});
                if (cfg.keep_selected) sum.selected_raw.push_back(raws[i]);
            }
            trace.row(static_cast<long long>(i) + 1, flag[i] != 0, cum, kNaN, kNaN, kNaN);
        }
        sum.n_seen = static_cast<long long>(raws.size());
        sum.n_selected = static_cast<long long>(idx.size());
        sum.final_m = st.m;
        sum.final_phi = phi(crit, st.m);
        ProbeRecord pr;
        pr.k = sum.n_seen;
        pr.phi = sum.final_phi;
        if (m_star) pr.err_fro = (st.m - *m_star).norm();
        sum.probes.push_back(pr);
    }

    if (sum.oracle && std::isfinite(sum.final_phi)) {
        sum.d_eff = std::exp((sum.final_phi - sum.oracle->phi_star) / p);
    }
    sum.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sum;
}

ReplicationResult run_replications(const RunConfig& base, int reps) {
    if (reps < 1) throw std::invalid_argument("need at least one replication");
    std::vector<RunSummary> runs(static_cast<std::size_t>(reps));
    std::vector<std::string> errors(static_cast<std::size_t>(reps));
    std::atomic<int> cursor{0};

    auto work = [&]() {
        for (;;) {
            int r = cursor.fetch_add(1);
            if (r >= reps) return;
            try {
                RunConfig cfg = base;
                cfg.trace_path.clear();
                cfg.keep_selected = false;
                cfg.stream.seed = derive_seed(base.stream.seed, static_cast<std::uint64_t>(r));
                runs[static_cast<std::size_t>(r)] = run_experiment(cfg);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(r)] = e.what();
            }
        }
    };
    unsigned hw = std::thread::hardware_concurrency();
    int workers = std::min<int>(reps, hw > 0 ? static_cast<int>(hw) : 1);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (int r = 0; r < reps; ++r) {
        if (!errors[static_cast<std::size_t>(r)].empty()) {
            throw std::runtime_error("replication " + std::to_string(r) +
                                     " failed: " + errors[static_cast<std::size_t>(r)]);
        }
    }

    ReplicationResult agg;
    agg.reps = reps;
    agg.final_phi.reserve(static_cast<std::size_t>(reps));
    for (const auto& run : runs) agg.final_phi.push_back(run.final_phi);
    double mean = 0.0;
    for (double v : agg.final_phi) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : agg.final_phi) var += (v - mean) * (v - mean);
    agg.mean_final_phi = mean;
    agg.sd_final_phi = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;

    const std::size_t np = runs.front().probes.size();
    bool aligned = np > 0;
    for (const auto& run : runs) aligned = aligned && run.probes.size() == np;
    if (aligned) {
        agg.grid_k.reserve(np);
        for (std::size_t j = 0; j < np; ++j) {
            agg.grid_k.push_back(runs.front().probes[j].k);
            double err_sum = 0.0, eff_sum = 0.0;
            for (const auto& run : runs) {
                err_sum += std::log10(run.probes[j].err_fro);
                eff_sum += run.probes[j].efficiency;
            }
            double eff_mean = eff_sum / reps;
            double eff_var = 0.0;
            for (const auto& run : runs) {
                eff_var += (run.probes[j].efficiency - eff_mean) *
                           (run.probes[j].efficiency - eff_mean);
            }
            agg.mean_log10_err.push_back(err_sum / reps);
            agg.mean_eff.push_back(eff_mean);
            agg.sd_eff.push_back(reps > 1 ? std::sqrt(eff_var / (reps - 1)) : 0.0);
        }

        // Least-squares slope over the last decade of k.
        const double k_max = static_cast<double>(agg.grid_k.back());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t j = 0; j < np; ++j) {
            double k = static_cast<double>(agg.grid_k[j]);
            double y = agg.mean_log10_err[j];
            if (k * 10.0 < k_max || !std::isfinite(y)) continue;
            double x = std::log10(k);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        if (cnt >= 2) {
            double denom = cnt * sxx - sx * sx;
            if (denom > 0) agg.slope_last_decade = (cnt * sxy - sx * sy) / denom;
        }
    }
    return agg;
}

std::vector<std::pair<double, double>> emit_histogram(const std::vector<double>& points,
                                                      double bandwidth) {
    if (points.empty()) throw std::invalid_argument("histogram needs a nonempty sample");
    auto [mn_it, mx_it] = std::minmax_element(points.begin(), points.end());
    const double mn = *mn_it, mx = *mx_it;
    double h = bandwidth > 0.0 ? bandwidth : (mx - mn) / 1000.0;
    if (!(h > 0.0)) {
        throw std::invalid_argument("degenerate sample needs an explicit bandwidth");
    }
    const double lo = mn - h, hi = mx + h;
    double step = h / 32.0;
    const double max_points = 2e6;
    if ((hi - lo) / step > max_points) step = (hi - lo) / max_points;
    const std::size_t count = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;

    std::vector<std::pair<double, double>> table(count);
    for (std::size_t i = 0; i < count; ++i) {
        table[i] = {lo + static_cast<double>(i) * step, 0.0};
    }
    const double scale = 0.75 / (h * static_cast<double>(points.size()));
    for (double x : points) {
        auto first = static_cast<long long>(std::ceil((x - h - lo) / step));
        auto last = static_cast<long long>(std::floor((x + h - lo) / step));
        first = std::max<long long>(first, 0);
        last = std::min<long long>(last, static_cast<long long>(count) - 1);
        for (long long i = first; i <= last; ++i) {
            double u = (table[static_cast<std::size_t>(i)].first - x) / h;
            double w = 1.0 - u * u;
            if (w > 0.0) table[static_cast<std::size_t>(i)].second += scale * w;
        }
    }
    return table;
}

void write_histogram(const std::string& path,
                     const std::vector<std::pair<double, double>>& table) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open histogram file: " + path);
    out << "x,density\n";
    std::string line;
    for (const auto& [x, dens] : table) {
        line.clear();
        line += format_double(x);
        line += ',';
        line += format_double(dens);
        line += '\n';
        out << line;
    }
}

}  // namespace streamthin
