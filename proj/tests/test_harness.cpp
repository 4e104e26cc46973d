#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aee/config.hpp"
#include "aee/errors.hpp"
#include "aee/experiment.hpp"
#include "aee/report.hpp"
#include "aee/stats.hpp"
#include "aee/trace.hpp"
#include "doctest.h"

using namespace aee;

namespace {

Trace parse(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

ExperimentConfig small_config(Algorithm a, CounterKind k) {
    ExperimentConfig c;
    c.algorithm = a;
    c.counters = k;
    c.zipf_packets = 30000;
    c.zipf_universe = 5000;
    c.trials = 3;
    c.width = 256;
    c.capacity = 128;
    c.register_bits = 20;
    return c;
}

void check_same_errors(const ExperimentReport& a, const ExperimentReport& b) {
    CHECK(a.normalized_error == b.normalized_error);
    CHECK(a.per_flow_mae == b.per_flow_mae);
    CHECK(a.on_arrival_error == b.on_arrival_error);
}

} // namespace

TEST_CASE("trace parsing") {
    const Trace t = parse("a,1\na,1\nb,3\n");
    const std::vector<TraceRecord> expected = {{"a", 1}, {"a", 1}, {"b", 3}};
    CHECK(t.records() == expected);
    CHECK(t.total_weight() == 5);
    CHECK(parse("").empty());
    const Trace plain = parse("x\ny\r\n\nx\n");
    CHECK(plain.size() == 3);
    CHECK(plain.weight(1) == 1);
    CHECK(plain.flow(1) == "y");
    CHECK_FALSE(plain.weighted());
}

TEST_CASE("trace parse errors carry the line number") {
    try {
        parse("a,1\nb,x\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("a,0\n"), ParseError);
    CHECK_THROWS_AS(parse(",3\n"), ParseError);
    CHECK_THROWS_AS(parse("a,1,2\n"), ParseError);
    CHECK_THROWS_AS(parse("a,-1\n"), ParseError);
}

TEST_CASE("trace file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "aee_trace_test.csv";
    const Trace t = parse("a,2\nb,1\na,7\n");
    write_trace(t, path);
    CHECK(load_trace(path).records() == t.records());
    std::filesystem::remove(path);
    CHECK_THROWS(load_trace(path));
}

TEST_CASE("zipf generator") {
    CHECK(gen_zipf(1000, 100, 1.0, 5).records() == gen_zipf(1000, 100, 1.0, 5).records());
    CHECK(gen_zipf(1000, 100, 1.0, 5).records() != gen_zipf(1000, 100, 1.0, 6).records());
    CHECK(gen_zipf(0, 10, 1.0, 1).empty());
    CHECK_THROWS_AS(gen_zipf(10, 0, 1.0, 1), ParameterError);
    CHECK_THROWS_AS(gen_zipf(10, 5, -1.0, 1), ParameterError);
}

TEST_CASE("zipf with skew 0 is uniform") {
    const Trace t = gen_zipf(100000, 10, 0.0, 3);
    const auto oracle = exact_oracle(t);
    double chi2 = 0.0;
    for (const auto& [k, v] : oracle) chi2 += (double(v) - 10000.0) * (double(v) - 10000.0) / 10000.0;
    CHECK(oracle.size() == 10);
    CHECK(chi2 < 27.88); // chi-square, 9 dof, p = 0.001
}

TEST_CASE("zipf top flow frequency") {
    // n / H_n with H_{10^6} = 14.392726722865...
    const Trace t = gen_zipf(1'000'000, 1'000'000, 1.0, 4);
    const double expected = 69479.54;
    const double top = double(exact_oracle(t).at("f1"));
    CHECK(std::abs(top - expected) <= 0.05 * expected);
}

TEST_CASE("exact oracle") {
    const auto o = exact_oracle(parse("a,1\na,1\nb,3\n"));
    CHECK(o.size() == 2);
    CHECK(o.at("a") == 2);
    CHECK(o.at("b") == 3);
    CHECK(exact_oracle(Trace{}).empty());
    const Trace z = gen_zipf(5000, 100, 1.0, 1);
    std::uint64_t sum = 0;
    for (const auto& [k, v] : exact_oracle(z)) sum += v;
    CHECK(sum == z.total_weight());
}

TEST_CASE("collision-free exact CMS has zero error") {
    ExperimentConfig c = small_config(Algorithm::cms, CounterKind::exact);
    c.zipf_universe = 50;
    c.width = 1 << 16;
    const ExperimentReport r = run_experiment(c);
    CHECK(r.normalized_error == 0.0);
    CHECK(r.per_flow_mae == 0.0);
    CHECK(r.trial_count == 3);
}

TEST_CASE("single estimator meets its bound") {
    ExperimentConfig c;
    c.algorithm = Algorithm::aee_single;
    c.counters = CounterKind::aee;
    c.epsilon = 0.05;
    c.delta = 0.05;
    c.register_bits = 12;
    c.zipf_packets = 1'000'000;
    c.zipf_universe = 1;
    c.trials = 10;
    const ExperimentReport r = run_experiment(c);
    CHECK(r.normalized_error <= 0.05);
    CHECK(r.distinct_flows == 1);
}

TEST_CASE("configuration conflicts fail before running") {
    ExperimentConfig c = small_config(Algorithm::aee_single, CounterKind::aee);
    c.epsilon = 0.001;
    c.delta = 0.0005;
    c.register_bits = 16;
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    ExperimentConfig d = small_config(Algorithm::dway_rap, CounterKind::exact);
    d.capacity = 100;
    CHECK_THROWS_AS(run_experiment(d), ConfigError);
    ExperimentConfig e = small_config(Algorithm::ss, CounterKind::max_accuracy);
    e.deamortized = true;
    CHECK_THROWS_AS(run_experiment(e), ConfigError);
    ExperimentConfig f = small_config(Algorithm::cms, CounterKind::exact);
    f.trials = 0;
    CHECK_THROWS_AS(validate(f), ConfigError);
}

TEST_CASE("same seed gives the same errors") {
    for (Algorithm a : {Algorithm::cms, Algorithm::cu, Algorithm::rap, Algorithm::dway_rap}) {
        ExperimentConfig c = small_config(a, CounterKind::aee);
        c.n_total = 0;
        c.on_arrival = true;
        const ExperimentReport r1 = run_experiment(c);
        const ExperimentReport r2 = run_experiment(c);
        check_same_errors(r1, r2);
        c.threads = 3;
        check_same_errors(r1, run_experiment(c));
    }
}

TEST_CASE("estimator modes at p = 1 report the exact-mode error") {
    for (Algorithm a : {Algorithm::cms, Algorithm::cu, Algorithm::ss, Algorithm::rap, Algorithm::dway_rap}) {
        ExperimentConfig exact = small_config(a, CounterKind::exact);
        exact.on_arrival = true;
        const ExperimentReport base = run_experiment(exact);
        for (CounterKind k : {CounterKind::aee, CounterKind::max_accuracy, CounterKind::max_speed}) {
            ExperimentConfig c = exact;
            c.counters = k;
            c.n_total = 1000; // below N', so the fixed-p mode runs at p = 1
            c.threshold = std::uint64_t{1} << 16;
            c.epsilon = 0.01;
            c.delta = 0.01; // N' = 106320 > 30000 packets: MaxSpeed stays at p = 1
            CAPTURE(to_string(a));
            CAPTURE(to_string(k));
            check_same_errors(base, run_experiment(c));
        }
    }
}

TEST_CASE("config files") {
    std::istringstream in(
        "# comment\n"
        "algorithm = dway-rap\n"
        "counters = max-speed   # trailing\n"
        "epsilon = 0.02\n"
        "\n"
        "ways = 8\n"
        "key_mode = fingerprint\n"
        "on_arrival = true\n");
    const ExperimentConfig c = parse_config(in);
    CHECK(c.algorithm == Algorithm::dway_rap);
    CHECK(c.counters == CounterKind::max_speed);
    CHECK(c.epsilon == 0.02);
    CHECK(c.ways == 8);
    CHECK(c.key_mode == KeyMode::fingerprint);
    CHECK(c.on_arrival);

    std::istringstream bad_key("colour = blue\n");
    CHECK_THROWS_AS(parse_config(bad_key), ConfigError);
    std::istringstream bad_value("width = wide\n");
    CHECK_THROWS_AS(parse_config(bad_value), ConfigError);
    std::istringstream no_eq("width 10\n");
    CHECK_THROWS_AS(parse_config(no_eq), ParseError);

    ExperimentConfig round;
    for (const auto& [k, v] : config_pairs(c)) apply_setting(round, k, v);
    CHECK(config_pairs(round) == config_pairs(c));
}

TEST_CASE("report round trips") {
    ExperimentConfig c = small_config(Algorithm::rap, CounterKind::aee);
    c.on_arrival = true;
    ExperimentReport r = run_experiment(c);
    r.config.emplace_back("note", "has,comma \"quoted\"");
    CHECK(report_from_json(report_to_json(r)) == r);

    std::stringstream csv;
    const ExperimentReport rows[2] = {r, r};
    write_csv(rows, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("algorithm,counters,epsilon,", 0) == 0);
    CHECK(text.find("trial_count,total_weight,distinct_flows,normalized_error,normalized_error_ci,"
                    "per_flow_mae,per_flow_mae_ci,on_arrival_error,on_arrival_error_ci,throughput_mops,"
                    "throughput_ci,analytical_bytes,actual_bytes,out_of_contract_trials\n") !=
          std::string::npos);
    const auto back = read_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == r);
    CHECK(back[1] == r);

    const auto path = std::filesystem::temp_directory_path() / "aee_report_test.json";
    emit_report(r, path, ReportFormat::json);
    std::ifstream f(path);
    std::stringstream body;
    body << f.rdbuf();
    CHECK(report_from_json(body.str()) == r);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(report_from_json("{\"config\": {}}"), ParseError);
}

TEST_CASE("student-t summaries") {
    const double v[] = {1, 2, 3, 4, 5};
    const Summary s = summarize(v);
    CHECK(s.mean == 3.0);
    CHECK(s.stddev == doctest::Approx(1.5811388));
    // t(0.975, 4) = 2.7764451
    CHECK(s.halfwidth == doctest::Approx(2.7764451 * 1.5811388 / std::sqrt(5.0)));
    const double one[] = {4};
    CHECK(summarize(one).halfwidth == 0.0);
    const double a[] = {5, 6, 7, 6, 5, 7}, b[] = {1, 2, 1, 2, 1, 2};
    CHECK(welch_greater_p(a, b) < 0.001);
    CHECK(welch_greater_p(b, a) > 0.999);
}
