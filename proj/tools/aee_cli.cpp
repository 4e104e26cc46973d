#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aee/config.hpp"
#include "aee/errors.hpp"
#include "aee/estimator.hpp"
#include "aee/estimator_array.hpp"
#include "aee/experiment.hpp"
#include "aee/fingerprint.hpp"
#include "aee/report.hpp"
#include "aee/sketch.hpp"
#include "aee/trace.hpp"

namespace {

int run_params(double epsilon, double delta, std::uint64_t n, std::size_t width, double delta_o,
               double alpha, double eps_f, double delta_f) {
    const aee::SamplingParams p = aee::derive_params(epsilon, delta, n);
    const aee::ArrayConfig array = aee::make_array_config(width, p, delta_o);
    const aee::ErrorBudget sketch = aee::error_budget(4, width, epsilon, delta);
    std::printf("n_prime: %llu\n", static_cast<unsigned long long>(p.n_prime));
    std::printf("p: %.10g\n", p.p);
    std::printf("required_bits: %u\n", p.required_bits);
    std::printf("n_tilde: %.6f\n", array.n_tilde);
    std::printf("threshold: %llu\n", static_cast<unsigned long long>(array.threshold));
    std::printf("slot_bits: %u\n", array.slot_bits);
    std::printf("heavy_capacity: %llu\n", static_cast<unsigned long long>(array.heavy_capacity));
    std::printf("array_bytes: %.2f\n", aee::EstimatorArray(array, p).memory().analytical_bytes);
    std::printf("sketch_eps_total_d4: %.6g\n", sketch.epsilon_total);
    std::printf("fingerprint_bits: %u\n", aee::fingerprint_length(alpha, eps_f, delta_f));
    return 0;
}

aee::ReportFormat parse_format(const std::string& f) {
    return f == "csv" ? aee::ReportFormat::csv : aee::ReportFormat::json;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Additive-error counters: experiments, traces and parameters"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "json";
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
    run->add_option("config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_path, "Report path (stdout when omitted)");
    run->add_option("-f,--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    run->add_option("-s,--set", overrides, "Override a config key, as key=value");

    std::uint64_t gen_n = 1'000'000, gen_universe = 1'000'000, gen_seed = 1;
    double gen_skew = 1.0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Write a Zipf trace as flow_id,weight CSV");
    gen->add_option("-n,--packets", gen_n, "Packets");
    gen->add_option("-u,--universe", gen_universe, "Distinct flows")->check(CLI::PositiveNumber);
    gen->add_option("-a,--skew", gen_skew, "Zipf skew")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("-o,--out", gen_out, "Output path (stdout when omitted)");

    double epsilon = 0.001, delta = 0.0005, delta_o = 2e-15, alpha = 10.0 / 11.0, eps_f = 0.0003,
           delta_f = 0.0003;
    std::uint64_t n_total = 1'000'000'000;
    std::size_t width = 1024;
    auto* params = app.add_subcommand("params", "Print derived register and table sizes");
    params->add_option("--epsilon", epsilon, "Estimator error fraction");
    params->add_option("--delta", delta, "Estimator failure probability");
    params->add_option("--n", n_total, "Stream length");
    params->add_option("--width", width, "Estimators per array");
    params->add_option("--delta-o", delta_o, "Oversampling failure probability");
    params->add_option("--alpha", alpha, "Fingerprint split parameter");
    params->add_option("--eps-f", eps_f, "Fingerprint collision volume fraction");
    params->add_option("--delta-f", delta_f, "Fingerprint failure probability");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*params) return run_params(epsilon, delta, n_total, width, delta_o, alpha, eps_f, delta_f);

        if (*gen) {
            const aee::Trace trace = aee::gen_zipf(gen_n, gen_universe, gen_skew, gen_seed);
            if (gen_out.empty()) {
                aee::write_trace(trace, std::cout);
            } else {
                aee::write_trace(trace, gen_out);
            }
            return 0;
        }

        aee::ExperimentConfig config = aee::load_config(config_path);
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw aee::ConfigError("override '" + kv + "' is not key=value");
            aee::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        const aee::ExperimentReport report = aee::run_experiment(config);
        if (out_path.empty()) {
            if (parse_format(format) == aee::ReportFormat::csv) {
                aee::write_csv(std::span<const aee::ExperimentReport>(&report, 1), std::cout);
            } else {
                std::cout << aee::report_to_json(report) << '\n';
            }
        } else {
            aee::emit_report(report, out_path, parse_format(format));
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
