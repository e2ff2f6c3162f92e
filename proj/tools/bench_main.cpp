// bench: synthetic dataset generator and Query_d / Query_a / Query_b workload
// runner.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "streetx/bench.hpp"

int main(int argc, char** argv) {
    CLI::App app{"StreetX benchmark harness"};
    app.require_subcommand(1);

    streetx::BenchConfig cfg;
    std::string out_dir = "bench-data";

    auto* generate = app.add_subcommand("generate", "generate a synthetic dataset");
    generate->add_option("--n", cfg.record_count, "record count")->capture_default_str();
    generate->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    generate->add_option("--area-km", cfg.area_km, "square generation area side")
        ->capture_default_str();
    generate->add_option("--span-days", cfg.span_days, "time span")->capture_default_str();
    generate->add_option("--out", out_dir, "data directory")->capture_default_str();

    std::string mode = "d";
    std::string data_dir = "bench-data";
    std::string report_path;
    cfg.region_file = "data/la_region.geojson";
    auto* run = app.add_subcommand("run", "run a query workload against the dataset");
    run->add_option("--mode", mode, "d (no policy) | a (policy) | b (policy + optimizations)")
        ->required();
    run->add_option("--queries", cfg.query_count, "number of random queries")
        ->capture_default_str();
    run->add_option("--query-km", cfg.query_km, "query box side")->capture_default_str();
    run->add_option("--query-days", cfg.query_days, "query time range")->capture_default_str();
    run->add_option("--region", cfg.region_file, "GeoJSON polygon for the allow region")
        ->capture_default_str();
    run->add_option("--subsample", cfg.subsample, "subsample the region to this many vertices");
    run->add_option("--report", report_path, "write the JSON report here");
    run->add_option("--data", data_dir, "data directory from `bench generate`")
        ->capture_default_str();
    run->add_option("--seed", cfg.seed, "random seed (must match generate for comparisons)")
        ->capture_default_str();
    run->add_option("--n", cfg.record_count, "record count label for the report table")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            streetx::bench_generate(cfg, out_dir);
            std::cout << "generated " << cfg.record_count << " records in " << out_dir << "\n";
            return 0;
        }
        if (mode.size() != 1 || (mode[0] != 'd' && mode[0] != 'a' && mode[0] != 'b')) {
            std::cerr << "error: --mode must be d, a, or b\n";
            return 2;
        }
        streetx::BenchReport report;
        report.config = cfg;
        report.modes.push_back(streetx::bench_run(cfg, data_dir, mode[0]));
        std::cout << streetx::bench_report_table(report);
        const auto& m = report.modes.back();
        std::cout << "rejected: " << m.rejected << "/" << m.queries << "\n";
        if (!report_path.empty()) {
            std::ofstream out(report_path);
            out << streetx::bench_report_to_json(report).dump(2) << "\n";
            std::cout << "report written to " << report_path << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
