#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "common.hpp"
#include "locpir/net.hpp"

namespace {

using namespace locpir;

std::optional<uint64_t> read_session_file(const std::string& path)
{
    std::ifstream in(path);
    uint64_t id = 0;
    if (!in || !(in >> id))
        return std::nullopt;
    return id;
}

void write_session_file(const std::string& path, uint64_t id)
{
    std::ofstream out(path, std::ios::trunc);
    out << id << "\n";
    if (!out)
        throw std::runtime_error("cannot write session file " + path);
}

// One request/response exchange; server-side errors become exceptions.
WireFrame exchange(const Socket& sock, WireFrame request)
{
    send_frame(sock, request);
    auto reply = recv_frame(sock);
    if (!reply)
        throw NetError("server closed the connection");
    if (reply->type == MsgType::Error) {
        auto [code, what] = parse_error(*reply);
        throw std::runtime_error("server rejected the request: " + what);
    }
    return std::move(*reply);
}

SessionInfo expect_session_info(const WireFrame& reply)
{
    if (reply.type != MsgType::Params)
        throw DecodeError("expected a PARAMS reply");
    return SessionInfo::decode(reply.payload);
}

// Resume when possible, otherwise open a fresh session.
SessionInfo negotiate(const Socket& sock, std::optional<uint64_t> resume)
{
    if (resume) {
        send_frame(sock, WireFrame{MsgType::Params, params_request(*resume)});
        auto reply = recv_frame(sock);
        if (!reply)
            throw NetError("server closed the connection");
        if (reply->type == MsgType::Params)
            return SessionInfo::decode(reply->payload);
        auto [code, what] = parse_error(*reply);
        std::cerr << "note: resume failed (" << what << "); starting fresh\n";
    }
    return expect_session_info(exchange(sock, WireFrame{MsgType::Params, params_request()}));
}

// Upload the one-time zero-sample sheet; returns the refreshed session info.
SessionInfo upload_sheet(const Socket& sock, const SessionInfo& info, const SecretKey* sk,
                         NoiseSampler& sampler)
{
    std::vector<uint8_t> payload =
        info.engine == EngineKind::TlweOracle
            ? zero_sheet_payload(*sk, info.region_count, info.service_bits, sampler)
            : zero_sheet_payload_trivial(info.params, info.region_count,
                                         info.service_bits);
    std::cerr << "uploading zero-sample sheet (" << payload.size() << " bytes)\n";
    return expect_session_info(
        exchange(sock, WireFrame{MsgType::ZeroSheet, std::move(payload)}));
}

struct Session {
    Socket sock;
    SessionInfo info;
    std::optional<SecretKey> sk;   // absent on clear-engine sessions
    NoiseSampler sampler{0, 0.0};  // one stream per session: sheet, then query
};

// Connect, negotiate, load the key if the engine needs one, and make sure the
// session has its sheet.
Session open_session(const std::string& server, const std::string& keyfile,
                     const std::string& session_file, uint64_t seed)
{
    Session s{tcp_connect(server), {}, {}};
    std::optional<uint64_t> resume;
    if (!session_file.empty())
        resume = read_session_file(session_file);
    s.info = negotiate(s.sock, resume);

    s.sampler = NoiseSampler(seed, s.info.params.sigma);
    if (s.info.engine == EngineKind::TlweOracle)
        s.sk = load_secret_key(keyfile, s.info.params);
    if (s.info.phase == SessionPhase::AwaitingSheet)
        s.info = upload_sheet(s.sock, s.info, s.sk ? &*s.sk : nullptr, s.sampler);
    if (!session_file.empty())
        write_session_file(session_file, s.info.session_id);
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"location-based PIR client"};
    app.require_subcommand(0, 1);
    app.fallthrough();  // --keyfile etc. remain valid after a subcommand name
    std::string server = "127.0.0.1:7707", keyfile, session_file;
    double lat = 0.0, lon = 0.0;
    int security = 80;

    app.add_option("--server", server, "server host:port");
    app.add_option("--keyfile", keyfile, "secret key file");
    app.add_option("--session-file", session_file,
                   "stores the session id so later queries skip preprocessing");
    auto* lat_opt = app.add_option("--lat", lat, "query latitude in degrees");
    auto* lon_opt = app.add_option("--lon", lon, "query longitude in degrees");

    auto* keygen_cmd = app.add_subcommand("keygen", "generate a secret key file");
    keygen_cmd->add_option("--security", security, "TLWE parameter set: 80 or 128")
        ->check(CLI::IsMember({80, 128}));

    auto* prep_cmd = app.add_subcommand(
        "preprocess", "open a session and upload the zero-sample sheet");

    CLI11_PARSE(app, argc, argv);

    try {
        const uint64_t seed = locpir::cli::seed_from_env();

        if (keygen_cmd->parsed()) {
            if (keyfile.empty())
                throw std::invalid_argument("keygen requires --keyfile");
            const auto params = locpir::cli::params_for_security(security);
            locpir::save_secret_key(keyfile, locpir::keygen(params, seed));
            std::cerr << "wrote " << locpir::security_level_name(params.level)
                      << " key to " << keyfile << "\n";
            return 0;
        }

        if (prep_cmd->parsed()) {
            if (session_file.empty())
                throw std::invalid_argument("preprocess requires --session-file");
            auto s = open_session(server, keyfile, session_file, seed);
            std::cerr << "session " << s.info.session_id << " ready ("
                      << s.info.region_count << " regions, " << s.info.service_bits
                      << " service bits)\n";
            return 0;
        }

        if (!*lat_opt || !*lon_opt)
            throw std::invalid_argument("query requires --lat and --lon");
        auto s = open_session(server, keyfile, session_file, seed);
        const locpir::GeoCoordinate where(lat, lon);
        auto query = s.sk
                         ? locpir::query_payload(where, s.info.format, *s.sk, s.sampler)
                         : locpir::query_payload_trivial(where, s.info.format,
                                                         s.info.params);
        auto reply = exchange(s.sock, locpir::WireFrame{locpir::MsgType::Query,
                                                        std::move(query)});
        if (reply.type != locpir::MsgType::Response)
            throw locpir::DecodeError("expected a RESPONSE reply");
        const uint64_t value =
            s.sk ? locpir::decrypt_response(reply.payload, *s.sk, s.info.service_bits)
                 : locpir::decode_response_trivial(reply.payload, s.info.params,
                                                   s.info.service_bits);
        std::cout << value << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
