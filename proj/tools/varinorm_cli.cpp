// varinorm command-line driver.
//
//   varinorm run <config>         run an experiment, emit the regret trace
//   varinorm bounds <trace.json>  recompute the bound report from a JSON trace
//   varinorm scaletest <config>   rerun a supervised stream under a feature
//                                 transformation and report the prediction drift

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <varinorm/experiment.hpp>

namespace {

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << text;
}

int cmd_run(const std::string& config_path) {
    varinorm::ExperimentConfig config = varinorm::parse_config_file(config_path);
    varinorm::RegretTrace trace = varinorm::run_experiment(config);
    write_output(varinorm::serialize_trace(trace, config.output_format), config.output_path);
    return 0;
}

// Recompute the bound report from the gradients and first comparator stored
// in a JSON trace and compare with the embedded report field by field.
int cmd_bounds(const std::string& trace_path) {
    std::ifstream in(trace_path);
    if (!in) throw std::runtime_error("cannot read trace file: " + trace_path);
    nlohmann::json j;
    in >> j;

    auto gradients = j.at("gradients").get<std::vector<varinorm::DenseVector>>();
    auto comparators = j.at("comparators").get<std::vector<varinorm::DenseVector>>();
    if (gradients.empty() || comparators.empty())
        throw std::runtime_error("trace has no gradients or comparators");

    varinorm::BoundReport fresh = varinorm::bound_report(gradients, comparators.front());
    std::cout << varinorm::report_to_json(fresh).dump(2) << "\n";

    if (!j.contains("bound_report")) {
        std::cerr << "trace has no stored bound_report; nothing to verify\n";
        return 0;
    }
    nlohmann::json stored = j.at("bound_report");
    nlohmann::json recomputed = varinorm::report_to_json(fresh);
    bool ok = true;
    for (auto it = recomputed.begin(); it != recomputed.end(); ++it) {
        double a = it.value().get<double>();
        double b = stored.value(it.key(), std::numeric_limits<double>::quiet_NaN());
        if (!(std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))) {
            std::cerr << "mismatch on " << it.key() << ": stored " << b << " recomputed " << a << "\n";
            ok = false;
        }
    }
    std::cerr << (ok ? "bound report verified\n" : "bound report MISMATCH\n");
    return ok ? 0 : 1;
}

// Run the configured supervised experiment twice: once on raw features and
// once with the configured rescale applied. Scale-invariant learners must
// produce (numerically) identical prediction sequences <f_t, w_t>.
int cmd_scaletest(const std::string& config_path) {
    varinorm::ExperimentConfig config = varinorm::parse_config_file(config_path);
    if (config.generator != "supervised")
        throw std::runtime_error("scaletest requires generator=supervised");
    if (config.rescale == "none" || config.rescale.empty())
        throw std::runtime_error("scaletest requires a rescale= transformation");

    varinorm::ExperimentConfig base = config;
    base.rescale = "none";
    varinorm::RegretTrace plain = varinorm::run_experiment(base);
    varinorm::RegretTrace twisted = varinorm::run_experiment(config);

    double max_dev = 0.0;
    for (std::size_t t = 0; t < plain.rows.size(); ++t) {
        double a = plain.rows[t].fw.value_or(0.0);
        double b = twisted.rows[t].fw.value_or(0.0);
        max_dev = std::max(max_dev, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
    }
    std::printf("rounds %zu  max_relative_prediction_deviation %.17g\n", plain.rows.size(), max_dev);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parameter-free online learning with varying norms"};
    app.require_subcommand(1);

    std::string run_config, bounds_trace, scale_config;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", run_config, "key=value config file")->required();
    CLI::App* bounds = app.add_subcommand("bounds", "recompute bounds from a JSON trace");
    bounds->add_option("trace", bounds_trace, "JSON trace produced by run")->required();
    CLI::App* scale = app.add_subcommand("scaletest", "verify scale invariance of a learner");
    scale->add_option("config", scale_config, "key=value config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (bounds->parsed()) return cmd_bounds(bounds_trace);
        if (scale->parsed()) return cmd_scaletest(scale_config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
