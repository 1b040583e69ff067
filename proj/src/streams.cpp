#include "streamthin/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace streamthin {

int model_dim(const ModelSpec& model, int raw_dim) {
    if (std::holds_alternative<Identity>(model)) return raw_dim;
    if (std::holds_alternative<WithIntercept>(model)) return raw_dim + 1;
    const auto& poly = std::get<Polynomial>(model);
    if (raw_dim != 1) throw std::invalid_argument("polynomial model needs scalar points");
    return poly.degree + 1;
}

Eigen::VectorXd apply_model(const ModelSpec& model, const Eigen::VectorXd& raw) {
    if (std::holds_alternative<Identity>(model)) return raw;
    if (std::holds_alternative<WithIntercept>(model)) {
        Eigen::VectorXd f(raw.size() + 1);
        f(0) = 1.0;
        f.tail(raw.size()) = raw;
        return f;
    }
    const auto& poly = std::get<Polynomial>(model);
    if (raw.size() != 1) throw std::invalid_argument("polynomial model needs scalar points");
    Eigen::VectorXd f(poly.degree + 1);
    double acc = 1.0;
    for (int i = 0; i <= poly.degree; ++i) {
        f(i) = acc;
        acc *= raw(0);
    }
    return f;
}

namespace {

int source_dim(const SourceSpec& src) {
    return std::visit(
        [](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NormalIid> || std::is_same_v<T, UniformCube> ||
                          std::is_same_v<T, ThreeSpheres>) {
                return s.d;
            } else if constexpr (std::is_same_v<T, MixtureNormalDiscrete>) {
                return 2;
            } else if constexpr (std::is_same_v<T, FileSource>) {
                return 0;  // determined by the file
            } else {
                return 1;
            }
        },
        src);
}

std::vector<Eigen::VectorXd> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<Eigen::VectorXd> rows;
    std::string line;
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        vals.clear();
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw std::runtime_error("bad number in " + path + ": " + line);
            }
            vals.push_back(v);
            p = next;
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p < end) {
                if (*p != ',') throw std::runtime_error("expected comma in " + path + ": " + line);
                ++p;
            }
        }
        if (vals.empty()) continue;
        rows.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                         static_cast<long>(vals.size())));
        if (rows.size() > 1 && rows.back().size() != rows.front().size()) {
            throw std::runtime_error("ragged rows in " + path);
        }
    }
    if (rows.empty()) throw std::runtime_error("input file has no rows: " + path);
    return rows;
}

}  // namespace

Stream::Stream(StreamSpec spec) : spec_(std::move(spec)), rng_(derive_seed(spec_.seed, 0)) {
    if (const auto* file = std::get_if<FileSource>(&spec_.source)) {
        rows_ = load_csv(file->path);
        raw_dim_ = static_cast<int>(rows_.front().size());
        long long avail = static_cast<long long>(rows_.size());
        if (spec_.n_total <= 0 || spec_.n_total > avail) spec_.n_total = avail;
    } else {
        raw_dim_ = source_dim(spec_.source);
        if (spec_.n_total <= 0) throw std::invalid_argument("generated streams need n_total > 0");
    }
    if (const auto* ts = std::get_if<ThreeSpheres>(&spec_.source)) {
        if (!(ts->r1 > ts->r2 && ts->r2 > ts->r3 && ts->r3 > 0.0)) {
            throw std::invalid_argument("three-spheres stream needs r1 > r2 > r3 > 0");
        }
    }
}

bool Stream::next(Eigen::VectorXd& raw) {
    if (produced_ >= spec_.n_total) return false;
    ++produced_;
    const double nn = static_cast<double>(spec_.n_total);

    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NormalIid>) {
                raw.resize(s.d);
                for (int i = 0; i < s.d; ++i) raw(i) = rng_.normal();
            } else if constexpr (std::is_same_v<T, UniformCube>) {
                raw.resize(s.d);
                for (int i = 0; i < s.d; ++i) raw(i) = rng_.uniform(-1.0, 1.0);
            } else if constexpr (std::is_same_v<T, QuadraticNormal>) {
                raw.resize(1);
                raw(0) = rng_.normal();
            } else if constexpr (std::is_same_v<T, MixtureNormalDiscrete>) {
                raw.resize(2);
                if (rng_.uniform() < 0.5) {
                    raw(0) = rng_.normal();
                    raw(1) = rng_.normal();
                } else {
                    double theta = rng_.uniform(0.0, 2.0 * std::numbers::pi);
                    raw(0) = std::numbers::sqrt2 * std::cos(theta);
                    raw(1) = std::numbers::sqrt2 * std::sin(theta);
                }
            } else if constexpr (std::is_same_v<T, ThreeSpheres>) {
                raw.resize(s.d);
                double norm = 0.0;
                do {
                    for (int i = 0; i < s.d; ++i) raw(i) = rng_.normal();
                    norm = raw.norm();
                } while (norm < 1e-12);
                int which = static_cast<int>(rng_.integer(3));
                double r = which == 0 ? s.r1 : (which == 1 ? s.r2 : s.r3);
                raw *= r / norm;
            } else if constexpr (std::is_same_v<T, Ramp>) {
                raw.resize(1);
                raw(0) = static_cast<double>(produced_) / nn;
            } else if constexpr (std::is_same_v<T, Sine>) {
                raw.resize(1);
                raw(0) = std::sin(2.0 * std::numbers::pi * s.nu *
                                  static_cast<double>(produced_) / nn);
            } else {
                static_assert(std::is_same_v<T, FileSource>);
                raw = rows_[static_cast<std::size_t>(produced_ - 1)];
            }
        },
        spec_.source);
    return true;
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::invalid_argument("bad numeric value: " + s);
    }
    return v;
}

}  // namespace

StreamSpec parse_stream_spec(const std::string& text) {
    std::string name = text;
    std::string args;
    if (auto pos = text.find(':'); pos != std::string::npos) {
        name = text.substr(0, pos);
        args = text.substr(pos + 1);
    }

    StreamSpec spec;
    if (name == "file") {
        if (args.empty()) throw std::invalid_argument("file source needs a path: file:PATH");
        spec.source = FileSource{args};
        spec.model = Identity{};
        return spec;
    }

    // key=value pairs, comma separated
    std::vector<std::pair<std::string, double>> kv;
    std::size_t start = 0;
    while (start < args.size()) {
        auto comma = args.find(',', start);
        if (comma == std::string::npos) comma = args.size();
        std::string item = args.substr(start, comma - start);
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("expected key=value in stream spec: " + item);
        }
        kv.emplace_back(item.substr(0, eq), parse_double(item.substr(eq + 1)));
        start = comma + 1;
    }
    auto get = [&kv](const std::string& key, double fallback) {
        for (const auto& [k, v] : kv) {
            if (k == key) return v;
        }
        return fallback;
    };

    if (name == "normal") {
        spec.source = NormalIid{static_cast<int>(get("d", 1))};
        spec.model = Identity{};
    } else if (name == "uniform") {
        spec.source = UniformCube{static_cast<int>(get("d", 2))};
        spec.model = WithIntercept{};
    } else if (name == "quad-normal") {
        spec.source = QuadraticNormal{};
        spec.model = Polynomial{2};
    } else if (name == "mixture") {
        spec.source = MixtureNormalDiscrete{};
        spec.model = Identity{};
    } else if (name == "three-spheres") {
        spec.source = ThreeSpheres{static_cast<int>(get("d", 3)), get("r1", 3.0),
                                   get("r2", 2.0), get("r3", 1.0)};
        spec.model = Identity{};
    } else if (name == "ramp") {
        spec.source = Ramp{};
        spec.model = Polynomial{2};
    } else if (name == "sine") {
        spec.source = Sine{get("nu", 5.0)};
        spec.model = Polynomial{2};
    } else {
        throw std::invalid_argument("unknown stream source: " + name);
    }
    return spec;
}

}  // namespace streamthin
