#pragma once

// Run harness: pairs a generator stream with a learner, records the regret
// trace, and serializes it as CSV (fixed columns) or JSON (self-contained,
// replayable by the bounds recomputation).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "baselines.hpp"
#include "generators.hpp"
#include "linalg.hpp"
#include "reduction.hpp"

namespace varinorm {

struct ExperimentConfig {
    // generator
    std::string generator = "gaussian";   // cycling_adversary | gaussian | supervised
    std::size_t d = 2;
    std::size_t T = 0;
    std::size_t k = 1;                    // cycling adversary cycles
    std::uint64_t seed = 0;
    std::string loss = "absolute";
    std::string rescale = "none";         // none | diag:c1,c2,... | diag_random:<seed> | full_random:<seed>:<cond>
    bool rotate = false;
    std::uint64_t rotate_seed = 0;

    // learner
    std::string learner = "varying_norm"; // varying_norm | ogd | adagrad | diag_scale | maxquad_scale
    std::string kind = "full_matrix";     // static | full_matrix | adagrad_root
    double ogd_d = 1.0;
    std::string eta = "1.0";              // positive number or "oracle"

    // domain
    std::string domain = "whole_space";   // whole_space | l2_ball | interval
    double radius = 1.0;
    double lo = -1.0;
    double hi = 1.0;

    double epsilon = 1.0;
    std::string output_path;
    std::string output_format = "csv";    // csv | json
};

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Flat key=value text, '#' comments. VARINORM_SEED in the environment
// overrides the seed key.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "generator") c.generator = val;
        else if (key == "d") c.d = std::stoul(val);
        else if (key == "T") c.T = std::stoul(val);
        else if (key == "k") c.k = std::stoul(val);
        else if (key == "seed") c.seed = std::stoull(val);
        else if (key == "loss") c.loss = val;
        else if (key == "rescale") c.rescale = val;
        else if (key == "rotate") c.rotate = (val == "1" || val == "true");
        else if (key == "rotate_seed") c.rotate_seed = std::stoull(val);
        else if (key == "learner") c.learner = val;
        else if (key == "kind") c.kind = val;
        else if (key == "D") c.ogd_d = std::stod(val);
        else if (key == "eta") c.eta = val;
        else if (key == "domain") c.domain = val;
        else if (key == "radius") c.radius = std::stod(val);
        else if (key == "lo") c.lo = std::stod(val);
        else if (key == "hi") c.hi = std::stod(val);
        else if (key == "epsilon") c.epsilon = std::stod(val);
        else if (key == "output_path") c.output_path = val;
        else if (key == "output_format") c.output_format = val;
        else throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (const char* env = std::getenv("VARINORM_SEED")) c.seed = std::stoull(env);
    return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

struct TraceRow {
    long round = 0;
    double gw = 0.0;                  // <g_t, w_t>, the instantaneous linear loss
    std::optional<double> fw;         // <f_t, w_t> for supervised streams
    std::vector<double> cum_regret;   // one entry per comparator
};

struct RegretTrace {
    std::vector<TraceRow> rows;
    std::vector<DenseVector> comparators;
    std::vector<DenseVector> gradients;
    std::optional<BoundReport> report;
};

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string to_csv(const RegretTrace& trace) {
    std::ostringstream out;
    out << "round,inner_product_gw";
    for (std::size_t c = 0; c < trace.comparators.size(); ++c) out << ",cum_regret_" << c;
    out << ",bound_l2,bound_fullmatrix,bound_adagrad\n";
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const TraceRow& r = trace.rows[i];
        out << r.round << ',' << fmt17(r.gw);
        for (double cr : r.cum_regret) out << ',' << fmt17(cr);
        if (i + 1 == trace.rows.size() && trace.report) {
            out << ',' << fmt17(trace.report->l2_bound) << ',' << fmt17(trace.report->fullmatrix_bound)
                << ',' << fmt17(trace.report->adagrad_bound);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json report_to_json(const BoundReport& r) {
    return nlohmann::json{{"l2_bound", r.l2_bound},
                          {"fullmatrix_bound", r.fullmatrix_bound},
                          {"adagrad_bound", r.adagrad_bound},
                          {"rank", r.rank},
                          {"trace_root", r.trace_root},
                          {"oracle_eta", r.oracle_eta},
                          {"t_eff", r.t_eff},
                          {"r_eff", r.r_eff},
                          {"lambda_max", r.lambda_max}};
}

inline nlohmann::json to_json(const RegretTrace& trace) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const TraceRow& r : trace.rows) {
        nlohmann::json row{{"round", r.round}, {"gw", r.gw}, {"cum_regret", r.cum_regret}};
        if (r.fw) row["fw"] = *r.fw;
        rounds.push_back(std::move(row));
    }
    nlohmann::json j{{"rounds", std::move(rounds)},
                     {"comparators", trace.comparators},
                     {"gradients", trace.gradients}};
    if (trace.report) j["bound_report"] = report_to_json(*trace.report);
    return j;
}

namespace detail {

// Uniform predict/update surface over the learner zoo. Supervised streams
// hand the feature to predict and the scalar subgradient to update; plain
// gradient streams pass null/zero.
class AnyLearner {
public:
    virtual ~AnyLearner() = default;
    virtual DenseVector predict(const DenseVector* feature) = 0;
    virtual void update(const DenseVector& g, double nabla) = 0;
};

class VaryingNormAdapter final : public AnyLearner {
public:
    VaryingNormAdapter(NormSchedule s, Domain dom, double eps) : l_(std::move(s), dom, eps) {}
    DenseVector predict(const DenseVector*) override { return l_.predict(); }
    void update(const DenseVector& g, double) override { l_.update(g); }

private:
    VaryingNormLearner l_;
};

class OgdAdapter final : public AnyLearner {
public:
    OgdAdapter(std::size_t d, double D, Domain dom) : l_(d, D, dom) {}
    DenseVector predict(const DenseVector*) override { return l_.predict(); }
    void update(const DenseVector& g, double) override { l_.update(g); }

private:
    OgdAdaptive l_;
};

class AdagradAdapter final : public AnyLearner {
public:
    AdagradAdapter(std::size_t d, double eta, Domain dom) : l_(d, eta, dom) {}
    DenseVector predict(const DenseVector*) override { return l_.predict(); }
    void update(const DenseVector& g, double) override { l_.update(g); }

private:
    AdagradFtrl l_;
};

class DiagScaleAdapter final : public AnyLearner {
public:
    DiagScaleAdapter(std::size_t d, double eps) : l_(d, eps) {}
    DenseVector predict(const DenseVector* feature) override {
        if (!feature) throw std::invalid_argument("diag_scale learner needs a feature stream");
        return l_.predict(*feature);
    }
    void update(const DenseVector&, double nabla) override { l_.update(nabla); }

private:
    DiagScaleLearner l_;
};

class MaxQuadAdapter final : public AnyLearner {
public:
    MaxQuadAdapter(std::size_t d, double eps) : l_(d, eps) {}
    DenseVector predict(const DenseVector* feature) override {
        if (!feature) throw std::invalid_argument("maxquad_scale learner needs a feature stream");
        return l_.predict(*feature);
    }
    void update(const DenseVector&, double nabla) override { l_.update(nabla); }

private:
    FullMatrixScaleLearner l_;
};

inline Domain make_domain(const ExperimentConfig& c) {
    if (c.domain == "whole_space") return Domain::whole_space();
    if (c.domain == "l2_ball") return Domain::l2_ball(c.radius);
    if (c.domain == "interval") return Domain::interval(c.lo, c.hi);
    throw std::invalid_argument("unknown domain: " + c.domain);
}

inline NormSchedule make_schedule(const std::string& kind, std::size_t d) {
    if (kind == "static") return NormSchedule::static_identity(d);
    if (kind == "full_matrix") return NormSchedule::full_matrix(d);
    if (kind == "adagrad_root") return NormSchedule::adagrad_root(d);
    throw std::invalid_argument("unknown norm schedule kind: " + kind);
}

struct RescaleSpec {
    enum class Kind { None, Diag, Full } kind = Kind::None;
    DenseVector diag;
    std::vector<DenseVector> full_rows;
};

inline RescaleSpec parse_rescale(const std::string& spec, std::size_t d) {
    RescaleSpec out;
    if (spec == "none" || spec.empty()) return out;
    if (spec.rfind("diag:", 0) == 0) {
        out.kind = RescaleSpec::Kind::Diag;
        std::istringstream in(spec.substr(5));
        std::string tok;
        while (std::getline(in, tok, ',')) out.diag.push_back(std::stod(tok));
        if (out.diag.size() != d) throw std::invalid_argument("rescale diag: needs d factors");
        return out;
    }
    if (spec.rfind("diag_random:", 0) == 0) {
        out.kind = RescaleSpec::Kind::Diag;
        out.diag = random_diag_factors(d, 1e-3, 1e3, std::stoull(spec.substr(12)));
        return out;
    }
    if (spec.rfind("full_random:", 0) == 0) {
        std::string rest = spec.substr(12);
        auto colon = rest.find(':');
        std::uint64_t s = std::stoull(rest.substr(0, colon));
        double cond = (colon == std::string::npos) ? 100.0 : std::stod(rest.substr(colon + 1));
        out.kind = RescaleSpec::Kind::Full;
        out.full_rows = random_conditioned_matrix(d, cond, s);
        return out;
    }
    throw std::invalid_argument("unknown rescale spec: " + spec);
}

// Comparator producing the same predictions on the rescaled features:
// diag divides, a full map A solves A^T x = w via the normal equations.
inline DenseVector transform_comparator(const DenseVector& w, const RescaleSpec& rs) {
    if (rs.kind == RescaleSpec::Kind::None) return w;
    if (rs.kind == RescaleSpec::Kind::Diag) {
        DenseVector out(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            out[i] = (rs.diag[i] != 0.0) ? w[i] / rs.diag[i] : 0.0;
        return out;
    }
    const std::size_t d = w.size();
    SymMatrix aat(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) aat(i, j) = dot(rs.full_rows[i], rs.full_rows[j]);
    DenseVector aw(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) aw[i] = dot(rs.full_rows[i], w);
    return pseudo_solve(aat, aw).x;
}

inline std::unique_ptr<AnyLearner> make_learner(const ExperimentConfig& c,
                                                const std::vector<DenseVector>* oblivious_grads,
                                                const DenseVector* oblivious_comparator) {
    Domain dom = make_domain(c);
    if (c.learner == "varying_norm")
        return std::make_unique<VaryingNormAdapter>(make_schedule(c.kind, c.d), dom, c.epsilon);
    if (c.learner == "ogd") return std::make_unique<OgdAdapter>(c.d, c.ogd_d, dom);
    if (c.learner == "adagrad") {
        double eta;
        if (c.eta == "oracle") {
            if (!oblivious_grads || !oblivious_comparator)
                throw std::invalid_argument("eta=oracle requires an oblivious gradient stream");
            SymMatrix gram(c.d);
            for (const auto& g : *oblivious_grads) gram.add_outer(g);
            eta = oracle_eta(gram, *oblivious_comparator);
        } else {
            eta = std::stod(c.eta);
        }
        return std::make_unique<AdagradAdapter>(c.d, eta, dom);
    }
    if (c.learner == "diag_scale") return std::make_unique<DiagScaleAdapter>(c.d, c.epsilon);
    if (c.learner == "maxquad_scale") return std::make_unique<MaxQuadAdapter>(c.d, c.epsilon);
    throw std::invalid_argument("unknown learner: " + c.learner);
}

}  // namespace detail

inline RegretTrace run_experiment(const ExperimentConfig& config) {
    RegretTrace trace;
    std::vector<DenseVector> prediction_log;
    std::vector<double> fw_log;
    bool supervised = (config.generator == "supervised");

    if (supervised) {
        SupervisedStream stream =
            gen_supervised(config.d, config.T, config.seed, parse_scalar_loss(config.loss));
        auto rs = detail::parse_rescale(config.rescale, config.d);
        DenseVector comparator = detail::transform_comparator(stream.hidden_model, rs);
        if (rs.kind == detail::RescaleSpec::Kind::Diag) rescale_features_diag(stream, rs.diag);
        else if (rs.kind == detail::RescaleSpec::Kind::Full) rescale_features_full(stream, rs.full_rows);

        auto learner = detail::make_learner(config, nullptr, nullptr);
        trace.comparators.push_back(comparator);
        for (std::size_t t = 0; t < stream.features.size(); ++t) {
            const DenseVector& f = stream.features[t];
            DenseVector w = learner->predict(&f);
            double pred = dot(f, w);
            double nabla = scalar_loss_subgradient(stream.loss, pred, stream.labels[t]);
            DenseVector g = scaled(f, nabla);
            trace.gradients.push_back(g);
            prediction_log.push_back(std::move(w));
            fw_log.push_back(pred);
            learner->update(g, nabla);
        }
    } else {
        GradientStream stream;
        if (config.generator == "cycling_adversary") {
            stream = gen_cycling_adversary(config.d, config.k, config.rotate, config.rotate_seed);
            if (config.T != 0 && config.T != stream.gradients.size())
                throw std::invalid_argument("cycling_adversary: T must equal 2d + 2k sqrt(d)");
        } else if (config.generator == "gaussian") {
            stream = gen_gaussian(config.d, config.T, config.seed);
        } else {
            throw std::invalid_argument("unknown generator: " + config.generator);
        }

        auto learner = detail::make_learner(config, &stream.gradients, &stream.comparator);
        trace.comparators.push_back(stream.comparator);
        for (const DenseVector& g : stream.gradients) {
            DenseVector w = learner->predict(nullptr);
            trace.gradients.push_back(g);
            prediction_log.push_back(std::move(w));
            learner->update(g, 0.0);
        }
    }

    // best-in-hindsight point on a Euclidean ball (exact for linear losses)
    if (config.domain == "l2_ball" && !trace.gradients.empty()) {
        DenseVector gsum(config.d, 0.0);
        for (const auto& g : trace.gradients) axpy(gsum, 1.0, g);
        double n = norm2(gsum);
        if (n > 0.0) trace.comparators.push_back(scaled(gsum, -config.radius / n));
    }

    std::vector<double> cum(trace.comparators.size(), 0.0);
    for (std::size_t t = 0; t < trace.gradients.size(); ++t) {
        TraceRow row;
        row.round = static_cast<long>(t) + 1;
        row.gw = dot(trace.gradients[t], prediction_log[t]);
        if (supervised) row.fw = fw_log[t];
        for (std::size_t c = 0; c < trace.comparators.size(); ++c) {
            cum[c] += row.gw - dot(trace.gradients[t], trace.comparators[c]);
            row.cum_regret.push_back(cum[c]);
        }
        trace.rows.push_back(std::move(row));
    }

    if (!trace.gradients.empty())
        trace.report = bound_report(trace.gradients, trace.comparators.front());
    return trace;
}

inline std::string serialize_trace(const RegretTrace& trace, const std::string& format) {
    if (format == "csv") return to_csv(trace);
    if (format == "json") return to_json(trace).dump(2) + "\n";
    throw std::invalid_argument("unknown output format: " + format);
}

}  // namespace varinorm
