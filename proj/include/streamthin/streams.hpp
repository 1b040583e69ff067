#pragma once

// Candidate sources for experiments: the analyzed synthetic distributions,
// two deterministic time-structured sequences, and CSV files. A stream
// yields raw points; the model maps them to regression vectors.

#include "streamthin/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace streamthin {

struct NormalIid {
    int d = 1;
};
struct UniformCube {
    int d = 2;  // U[-1,1]^d
};
// Scalar N(0,1); pairs with the quadratic polynomial model (1, x, x^2).
struct QuadraticNormal {};
// Half N(0, I_2), half uniform on the circle of radius sqrt(2).
struct MixtureNormalDiscrete {};
// Equal mixture of uniform distributions on three nested spheres.
struct ThreeSpheres {
    int d = 3;
    double r1 = 3.0, r2 = 2.0, r3 = 1.0;
};
// Deterministic scalar ramp x_i = i/N.
struct Ramp {};
// Deterministic scalar x_i = sin(2 pi nu i / N).
struct Sine {
    double nu = 5.0;
};
// CSV, one point per line, comma-separated coordinates, loaded eagerly.
struct FileSource {
    std::string path;
};
using SourceSpec = std::variant<NormalIid, UniformCube, QuadraticNormal, MixtureNormalDiscrete,
                                ThreeSpheres, Ramp, Sine, FileSource>;

struct Identity {};       // f(x) = x
struct WithIntercept {};  // f(x) = (1, x)
struct Polynomial {       // scalar x -> (1, x, ..., x^degree)
    int degree = 2;
};
using ModelSpec = std::variant<Identity, WithIntercept, Polynomial>;

struct StreamSpec {
    SourceSpec source;
    long long n_total = 0;  // horizon N; 0 for a file means "all rows"
    std::uint64_t seed = 1;
    ModelSpec model = Identity{};
};

int model_dim(const ModelSpec& model, int raw_dim);
Eigen::VectorXd apply_model(const ModelSpec& model, const Eigen::VectorXd& raw);

class Stream {
public:
    explicit Stream(StreamSpec spec);

    // Fills the next raw point; false once n_total points were produced (or
    // the file is exhausted).
    bool next(Eigen::VectorXd& raw);

    int raw_dim() const { return raw_dim_; }
    int feature_dim() const { return model_dim(spec_.model, raw_dim_); }
    Eigen::VectorXd features(const Eigen::VectorXd& raw) const {
        return apply_model(spec_.model, raw);
    }
    long long size() const { return spec_.n_total; }
    long long produced() const { return produced_; }
    const StreamSpec& spec() const { return spec_; }

private:
    StreamSpec spec_;
    Rng rng_;
    int raw_dim_ = 0;
    long long produced_ = 0;
    std::vector<Eigen::VectorXd> rows_;  // file sources only
};

// Parses "name" or "name:key=value,..." source descriptions, e.g.
//   normal:d=5      uniform:d=2      quad-normal     mixture
//   three-spheres:d=5,r1=3,r2=2,r3=1 ramp            sine:nu=5
//   file:points.csv
// and fills the source's natural default model (overridable afterwards).
StreamSpec parse_stream_spec(const std::string& text);

}  // namespace streamthin
