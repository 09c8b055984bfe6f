#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>

#include "common.hpp"
#include "locpir/net.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int)
{
    g_stop = true;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace locpir;

    CLI::App app{"location-based PIR server"};
    std::string dataset_path, listen_addr = "127.0.0.1:7707";
    std::string engine_name = "clear", key_path;
    int security = 80, frac_bits = 7;
    unsigned threads = 1;
    app.add_option("--dataset", dataset_path, "region/service CSV")->required();
    app.add_option("--security", security, "TLWE parameter set: 80 or 128")
        ->check(CLI::IsMember({80, 128}));
    app.add_option("--frac-bits", frac_bits, "fractional bits of the fixed-point grid")
        ->check(CLI::Range(1, 54));
    app.add_option("--engine", engine_name, "clear or tlwe-oracle")
        ->check(CLI::IsMember({"clear", "tlwe-oracle"}));
    app.add_option("--insecure-oracle-key", key_path,
                   "secret key file for the tlwe-oracle demo engine (the server "
                   "holding it voids all privacy)");
    app.add_option("--listen", listen_addr, "host:port (port 0 = ephemeral)");
    app.add_option("--threads", threads, "worker threads per query")
        ->check(CLI::Range(1u, 64u));
    CLI11_PARSE(app, argc, argv);

    try {
        ServerConfig cfg;
        cfg.engine = parse_engine_kind(engine_name);
        cfg.params = cli::params_for_security(security);
        cfg.workers = threads;
        cfg.seed = cli::seed_from_env();

        const FixedPointFormat format{9, static_cast<uint8_t>(frac_bits)};
        auto [records, dataset] = load_dataset(dataset_path, format);
        const auto overlaps = validate_disjoint(records, format);
        for (const auto& [i, j] : overlaps)
            std::cerr << "warning: regions '" << records[i].name << "' and '"
                      << records[j].name << "' overlap after encoding\n";
        cfg.records = std::move(records);
        cfg.dataset = dataset;

        if (cfg.engine == EngineKind::TlweOracle) {
            if (key_path.empty())
                throw std::invalid_argument(
                    "--engine tlwe-oracle requires --insecure-oracle-key");
            cfg.oracle_key = load_secret_key(key_path, cfg.params);
            std::cerr << "warning: demo mode; the oracle key voids all privacy\n";
        } else if (!key_path.empty()) {
            throw std::invalid_argument(
                "--insecure-oracle-key only applies to --engine tlwe-oracle");
        }

        const char* level = security_level_name(cfg.params.level);
        Server server(std::move(cfg));
        TcpListener listener(listen_addr);
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cerr << "serving " << dataset.region_count << " regions ("
                  << dataset.service_bits << " service bits, " << level << ", "
                  << engine_name << ") on port " << listener.port() << "\n";
        serve(server, listener, g_stop);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
