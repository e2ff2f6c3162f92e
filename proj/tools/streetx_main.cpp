// streetx: serve the HTTP API and manage boundary sets.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "streetx/service.hpp"

namespace {

streetx::HttpServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const std::string& config_path) {
    streetx::ServiceConfig cfg = streetx::ServiceConfig::load(config_path);
    if (cfg.token_file.empty()) {
        std::cerr << "error: a token file is required (config \"tokenFile\" or STREETX_TOKEN_FILE)\n";
        return 2;
    }
    streetx::Store store(cfg.data_dir);
    streetx::Engine::Options options;
    options.optimizer_enabled = cfg.optimizer_enabled;
    streetx::Engine engine(store, options);
    streetx::HttpServer server(engine, streetx::load_token_file(cfg.token_file));
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    const int port = server.start(cfg.listen, cfg.port);
    std::cout << "streetx listening on " << cfg.listen << ":" << port << " (data: " << cfg.data_dir
              << ")\n";
    // start() serves on a background thread; block until a signal stops it
    std::string line;
    while (std::getline(std::cin, line)) {
    }
    server.stop();
    return 0;
}

int cmd_boundaries_add(const std::string& data_dir, const std::string& name,
                       const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        std::cerr << "error: cannot open '" << file << "'\n";
        return 2;
    }
    streetx::Store store(data_dir);
    store.register_boundary_set(
        streetx::boundary_set_from_geojson(name, nlohmann::json::parse(in)));
    std::cout << "registered boundary set '" << name << "'\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"StreetX spatio-temporal access control service"};
    app.require_subcommand(1);

    std::string config_path;
    auto* serve = app.add_subcommand("serve", "run the HTTP API server");
    serve->add_option("--config", config_path, "JSON config file");

    std::string data_dir = "streetx-data";
    std::string bname;
    std::string bfile;
    auto* boundaries = app.add_subcommand("boundaries", "manage spatial boundary sets");
    auto* badd = boundaries->add_subcommand("add", "register a GeoJSON boundary set");
    badd->add_option("--data-dir", data_dir, "store data directory");
    badd->add_option("--name", bname, "boundary set name (e.g. County)")->required();
    badd->add_option("--file", bfile, "GeoJSON FeatureCollection")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed()) return cmd_serve(config_path);
        if (badd->parsed()) return cmd_boundaries_add(data_dir, bname, bfile);
        std::cerr << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
