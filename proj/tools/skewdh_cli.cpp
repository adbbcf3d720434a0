// skewdh: parameter generation, handshake demo, TCP endpoints, security-game
// runner and encryption tool around the skewdh library.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "skewdh/games.hpp"
#include "skewdh/net.hpp"
#include "skewdh/params_io.hpp"
#include "skewdh/pke.hpp"
#include "skewdh/selftest.hpp"
#include "skewdh/wire.hpp"

using namespace skewdh;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;

struct BadInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint64_t env_seed() {
    if (const char* env = std::getenv("SKEWDH_SEED")) return std::strtoull(env, nullptr, 0);
    return 0;
}

DomainParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw BadInput("cannot parse " + path + ": " + e.what());
    }
    try {
        return params_from_json(j);
    } catch (const error& e) {
        throw BadInput("invalid parameter file " + path + ": " + e.what());
    }
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw BadInput("cannot parse " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write " + path);
    out << text;
}

Sid parse_sid(const std::string& hex_str) {
    auto bytes = from_hex(hex_str);
    if (bytes.size() != 16) throw BadInput("sid must be 16 bytes of hex");
    Sid sid{};
    std::copy(bytes.begin(), bytes.end(), sid.begin());
    return sid;
}

Sid random_sid(Rng& rng) {
    Sid sid{};
    for (size_t i = 0; i < sid.size(); i += 8) {
        uint64_t w = rng.next();
        for (size_t j = 0; j < 8; ++j) sid[i + j] = uint8_t(w >> (8 * j));
    }
    return sid;
}

std::string key_digest_hex(const FieldElement& key) {
    auto bytes = encode(key);
    auto d = sha256(bytes);
    return hex(d);
}

std::string sid_hex(const Sid& sid) { return hex(std::span(sid.data(), sid.size())); }

// ---- demo -----------------------------------------------------------------

int run_demo(const DomainParams& dp, uint64_t seed, uint64_t runs, bool quiet) {
    uint64_t mismatches = 0, aborted = 0;
    for (uint64_t run = 0; run < runs; ++run) {
        Rng rng = Rng::derive(seed, run);
        Sid sid = random_sid(rng);
        auto [init_session, m1] = initiate(dp, "alice", "bob", sid, rng);
        auto m1_hex = hex(encode_init(m1));
        try {
            auto [resp_session, m2] = respond(dp, "bob", m1, rng);
            auto m2_hex = hex(encode_resp(m2));
            FieldElement ki = finalize(dp, init_session, m2);
            bool match = ki == *resp_session.sk;
            if (!match) ++mismatches;
            if (!quiet) {
                nlohmann::json a{{"role", "initiator"},
                                 {"sid", sid_hex(sid)},
                                 {"messages", {m1_hex, m2_hex}},
                                 {"key", hex(encode(ki))}};
                nlohmann::json b{{"role", "responder"},
                                 {"sid", sid_hex(sid)},
                                 {"messages", {m1_hex, m2_hex}},
                                 {"key", hex(encode(*resp_session.sk))}};
                std::cout << a.dump() << "\n" << b.dump() << "\n";
            }
        } catch (const error& e) {
            if (e.code() != errc::degenerate_session) throw;
            ++aborted;
            if (!quiet) {
                nlohmann::json a{{"role", "responder"},
                                 {"sid", sid_hex(sid)},
                                 {"messages", {m1_hex}},
                                 {"abort", errc_name(e.code())}};
                std::cout << a.dump() << "\n";
            }
        }
    }
    if (runs > 1)
        std::cout << nlohmann::json{{"runs", runs}, {"mismatches", mismatches}, {"aborted", aborted}}
                         .dump()
                  << "\n";
    return mismatches == 0 ? kExitOk : kExitFailure;
}

// ---- games ----------------------------------------------------------------

int run_games(const DomainParams& dp, const std::string& game, const std::string& adversary,
              uint64_t trials, uint64_t seed, uint32_t l, double confidence) {
    std::string digest = params_digest_hex(dp);
    GameConfig cfg;
    cfg.params = dp;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.confidence = confidence;

    auto unknown = [&]() -> int {
        std::cerr << "unknown adversary '" << adversary << "' for game " << game << "\n";
        return kExitBadInput;
    };

    if (game == "sap") {
        SapAdversary adv;
        if (adversary == "bruteforce") adv = adversaries::sap_bruteforce(dp);
        else if (adversary == "constone") adv = adversaries::sap_const_one(dp);
        else if (adversary == "zero") adv = adversaries::sap_zero(dp);
        else return unknown();
        std::cout << report_to_json(sap_game(cfg, adv), digest).dump() << "\n";
        return kExitOk;
    }
    if (game == "cgsap") {
        CgsapAdversary adv;
        if (adversary == "bruteforce") adv = adversaries::cgsap_bruteforce(dp);
        else if (adversary == "abstain") adv = adversaries::cgsap_abstain();
        else if (adversary == "random") adv = adversaries::cgsap_random(dp);
        else if (adversary == "echo") adv = adversaries::cgsap_echo();
        else return unknown();
        std::cout << report_to_json(cgsap_game(cfg, adv), digest).dump() << "\n";
        return kExitOk;
    }
    if (game == "dgsap") {
        DgsapAdversary adv;
        if (adversary == "bruteforce") adv = adversaries::dgsap_bruteforce(dp);
        else if (adversary == "coinflip") adv = adversaries::dgsap_coinflip();
        else if (adversary == "constone") adv = adversaries::dgsap_const_one();
        else return unknown();
        std::cout << report_to_json(dgsap_game(cfg, adv), digest).dump() << "\n";
        return kExitOk;
    }

    AmAdversary am;
    if (adversary == "bruteforce") am = adversaries::am_bruteforce(dp);
    else if (adversary == "coinflip") am = adversaries::am_coinflip();
    else return unknown();
    AmConfig amcfg;
    amcfg.session_bound = l;

    if (game == "sk-am") {
        auto rep = sk_experiment(dp, amcfg, am, trials, seed, confidence);
        auto j = report_to_json(rep, digest);
        j["l"] = l;
        std::cout << j.dump() << "\n";
        return kExitOk;
    }
    if (game == "reduction") {
        auto eps = sk_experiment(dp, amcfg, am, trials, seed, confidence);
        auto dist = reduction_distinguisher(dp, amcfg, am);
        auto red = reduction_win_rate(cfg, dist);
        Interval lhs = abs_offset(red.ci, 0.5);
        Interval rhs = scaled(eps.ci, 1.0 / double(l));
        nlohmann::json j{{"game", "reduction"},
                         {"l", l},
                         {"trials", trials},
                         {"win_rate", red.estimate},
                         {"win_ci_lo", red.ci.lo},
                         {"win_ci_hi", red.ci.hi},
                         {"eps_hat", eps.estimate},
                         {"eps_ci_lo", eps.ci.lo},
                         {"eps_ci_hi", eps.ci.hi},
                         {"win_minus_half_lo", lhs.lo},
                         {"win_minus_half_hi", lhs.hi},
                         {"eps_over_l_lo", rhs.lo},
                         {"eps_over_l_hi", rhs.hi},
                         {"consistent", overlaps(lhs, rhs)},
                         {"seed", seed},
                         {"params_digest", digest}};
        std::cout << j.dump() << "\n";
        return kExitOk;
    }
    std::cerr << "unknown game " << game << "\n";
    return kExitBadInput;
}

// ---- serve / connect --------------------------------------------------------

std::mutex g_print_mutex;

void print_handshake_line(const char* role, const HandshakeResult& hs, bool insecure) {
    nlohmann::json j{{"role", role}, {"sid", sid_hex(hs.sid)}};
    if (!hs.peer.empty()) j["peer"] = hs.peer;
    if (hs.accepted) {
        j["key_digest"] = key_digest_hex(hs.key);
        if (insecure) j["key"] = hex(encode(hs.key));
    } else {
        j["abort"] = hs.abort_reason;
    }
    std::lock_guard lock(g_print_mutex);
    std::cout << j.dump() << "\n" << std::flush;
}

int run_serve(const DomainParams& dp, uint16_t port, bool once, bool insecure, uint64_t seed,
              const std::string& id) {
    auto digest = params_digest(dp);
    TcpListener listener(port);
    std::cout << "LISTENING " << listener.port() << "\n" << std::flush;

    std::atomic<uint64_t> conn_index{0};
    auto handle = [&](TcpStream conn, uint64_t index) {
        try {
            Rng rng = Rng::derive(seed, index);
            auto hs = serve_handshake(dp, digest, id, conn.reader(), conn.writer(), rng);
            print_handshake_line("responder", hs, insecure);
        } catch (const std::exception& e) {
            std::lock_guard lock(g_print_mutex);
            std::cout << nlohmann::json{{"role", "responder"}, {"error", e.what()}}.dump() << "\n"
                      << std::flush;
        }
    };

    if (once) {
        handle(listener.accept_one(), conn_index++);
        return kExitOk;
    }
    std::vector<std::thread> workers;
    for (;;) {
        TcpStream conn = listener.accept_one();
        workers.emplace_back(handle, std::move(conn), conn_index++);
    }
}

int run_connect(const DomainParams& dp, const std::string& host, uint16_t port,
                const std::string& sid_hex_arg, bool insecure, uint64_t seed,
                const std::string& id) {
    auto digest = params_digest(dp);
    Rng rng(seed);
    Sid sid = sid_hex_arg.empty() ? random_sid(rng) : parse_sid(sid_hex_arg);
    TcpStream conn = TcpStream::connect_to(host, port);
    auto hs = connect_handshake(dp, digest, id, sid, conn.reader(), conn.writer(), rng);
    print_handshake_line("initiator", hs, insecure);
    if (hs.accepted) return kExitOk;
    return hs.abort_reason == errc_name(errc::degenerate_session) ? kExitOk : kExitFailure;
}

// ---- pke --------------------------------------------------------------------

int run_pke_keygen(const DomainParams& dp, const std::string& pub_path,
                   const std::string& sec_path, uint64_t seed) {
    Rng rng(seed);
    auto kp = pke_keygen(dp, rng);
    nlohmann::json pub{{"a", element_to_json(kp.base)},
                       {"A", element_to_json(kp.pub)},
                       {"params_digest", params_digest_hex(dp)}};
    write_text(pub_path, pub.dump() + "\n");
    nlohmann::json sec = telement_to_json(*kp.secret);
    sec["params_digest"] = params_digest_hex(dp);
    write_text(sec_path, sec.dump() + "\n");
    std::cerr << "public key A = " << hex(encode(kp.pub)) << "\n";
    return kExitOk;
}

int run_pke_encrypt(const DomainParams& dp, const std::string& pub_path, const std::string& m_hex,
                    uint64_t seed) {
    auto pub_json = load_json(pub_path);
    if (pub_json.value("params_digest", params_digest_hex(dp)) != params_digest_hex(dp))
        throw BadInput("public key belongs to different parameters");
    FieldElement pub = element_from_json(dp.field, pub_json.at("A"));
    FieldElement m = decode(dp.field, from_hex(m_hex));
    Rng rng(seed);
    auto ct = pke_encrypt(dp, pub, m, rng);
    std::cout << hex(encode_ciphertext(ct)) << "\n";
    return kExitOk;
}

int run_pke_decrypt(const DomainParams& dp, const std::string& sec_path,
                    const std::string& ct_hex) {
    auto sec_json = load_json(sec_path);
    if (sec_json.value("params_digest", params_digest_hex(dp)) != params_digest_hex(dp))
        throw BadInput("secret key belongs to different parameters");
    TElement secret = telement_from_json(dp.tparams, sec_json);
    PkeKeyPair kp{dp.base, derive_pk(dp, secret), std::move(secret)};
    auto ct = decode_ciphertext(dp.field, from_hex(ct_hex));
    std::cout << hex(encode(pke_decrypt(dp, kp, ct))) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"key agreement from the conjugation action of skew polynomial functions"};
    app.require_subcommand(1);

    uint64_t default_seed = env_seed();

    // gen-params
    auto* gen = app.add_subcommand("gen-params", "generate a parameter file");
    GenOptions gen_opt;
    std::string gen_out = "-";
    std::string gen_mode = "normalized";
    gen_opt.seed = default_seed;
    gen->add_option("--p", gen_opt.p, "prime modulus")->required();
    gen->add_option("--m", gen_opt.m, "extension degree")->required();
    gen->add_option("--s", gen_opt.s, "Frobenius exponent (sigma = x -> x^(p^s))");
    gen->add_option("--beta", gen_opt.beta_index, "beta as a canonical element index");
    gen->add_option("--parts", gen_opt.n_parts, "number of additive parts");
    gen->add_option("--degree", gen_opt.degree, "degree d of the key-schedule power sum");
    gen->add_option("--r-min", gen_opt.r_min, "minimum orbit size");
    gen->add_option("--r-max", gen_opt.r_max, "maximum orbit size");
    gen->add_option("--seed", gen_opt.seed, "rng seed (env SKEWDH_SEED)");
    gen->add_option("--mode", gen_mode, "normalized|faithful");
    gen->add_option("--out", gen_out, "output file ('-' for stdout)");

    // demo
    auto* demo = app.add_subcommand("demo", "run the handshake in-process");
    std::string demo_params;
    uint64_t demo_seed = default_seed, demo_runs = 1;
    bool demo_quiet = false;
    demo->add_option("--params", demo_params, "parameter file")->required();
    demo->add_option("--seed", demo_seed, "rng seed");
    demo->add_option("--runs", demo_runs, "number of handshakes");
    demo->add_flag("--quiet", demo_quiet, "suppress per-run transcript lines");

    // serve
    auto* serve = app.add_subcommand("serve", "answer handshakes over TCP");
    std::string serve_params, serve_id = "server";
    uint16_t serve_port = 0;
    bool serve_once = false, serve_insecure = false;
    uint64_t serve_seed = default_seed;
    serve->add_option("--params", serve_params, "parameter file")->required();
    serve->add_option("--port", serve_port, "port (0 picks one)");
    serve->add_flag("--once", serve_once, "handle a single connection and exit");
    serve->add_flag("--insecure-print", serve_insecure, "print raw keys, not digests");
    serve->add_option("--seed", serve_seed, "rng seed");
    serve->add_option("--id", serve_id, "party identifier");

    // connect
    auto* connect = app.add_subcommand("connect", "initiate a handshake over TCP");
    std::string conn_params, conn_host = "127.0.0.1", conn_sid, conn_id = "client";
    uint16_t conn_port = 0;
    bool conn_insecure = false;
    uint64_t conn_seed = default_seed;
    connect->add_option("--params", conn_params, "parameter file")->required();
    connect->add_option("--host", conn_host, "server host");
    connect->add_option("--port", conn_port, "server port")->required();
    connect->add_option("--sid", conn_sid, "session id (32 hex chars)");
    connect->add_flag("--insecure-print", conn_insecure, "print raw keys, not digests");
    connect->add_option("--seed", conn_seed, "rng seed");
    connect->add_option("--id", conn_id, "party identifier");

    // games
    auto* games = app.add_subcommand("games", "run a security experiment");
    std::string games_params, games_game;
    std::string games_adv = "bruteforce";
    uint64_t games_trials = 2000, games_seed = default_seed;
    uint32_t games_l = 1;
    double games_conf = 0.99;
    games->add_option("--params", games_params, "parameter file")->required();
    games->add_option("--game", games_game, "sap|cgsap|dgsap|sk-am|reduction")->required();
    games->add_option("--adversary", games_adv, "adversary name (default bruteforce)");
    games->add_option("--trials", games_trials, "trials per experiment");
    games->add_option("--seed", games_seed, "rng seed");
    games->add_option("--l", games_l, "session bound for sk-am/reduction");
    games->add_option("--confidence", games_conf, "confidence level for intervals");

    // pke
    auto* pke = app.add_subcommand("pke", "probabilistic encryption on the same action");
    pke->require_subcommand(1);
    auto* keygen = pke->add_subcommand("keygen", "generate a key pair");
    std::string kg_params, kg_pub, kg_sec;
    uint64_t kg_seed = default_seed;
    keygen->add_option("--params", kg_params, "parameter file")->required();
    keygen->add_option("--pub", kg_pub, "public key output file")->required();
    keygen->add_option("--sec", kg_sec, "secret key output file")->required();
    keygen->add_option("--seed", kg_seed, "rng seed");
    auto* encrypt = pke->add_subcommand("encrypt", "encrypt one field element");
    std::string enc_params, enc_pub, enc_m;
    uint64_t enc_seed = default_seed;
    encrypt->add_option("--params", enc_params, "parameter file")->required();
    encrypt->add_option("--pub", enc_pub, "public key file")->required();
    encrypt->add_option("--m", enc_m, "message, 2m bytes of hex")->required();
    encrypt->add_option("--seed", enc_seed, "rng seed");
    auto* decrypt = pke->add_subcommand("decrypt", "decrypt a ciphertext");
    std::string dec_params, dec_sec, dec_ct;
    decrypt->add_option("--params", dec_params, "parameter file")->required();
    decrypt->add_option("--sec", dec_sec, "secret key file")->required();
    decrypt->add_option("--ct", dec_ct, "ciphertext, 4m bytes of hex")->required();

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the exhaustive invariant suite");
    bool mutate_delta = false;
    selftest->add_flag("--mutate-delta", mutate_delta,
                       "negative control: break the derivation on purpose");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (gen_mode != "normalized" && gen_mode != "faithful")
                throw BadInput("mode must be normalized or faithful");
            gen_opt.mode = gen_mode == "normalized" ? SheetMode::normalized : SheetMode::faithful;
            auto dp = gen_params(gen_opt);
            write_text(gen_out, params_to_json(dp).dump() + "\n");
            if (dp.tparams.warning) std::cerr << "warning: " << *dp.tparams.warning << "\n";
            std::cerr << "params_digest " << params_digest_hex(dp) << ", orbit size "
                      << dp.orbit->size() << "\n";
            return kExitOk;
        }
        if (demo->parsed()) return run_demo(load_params(demo_params), demo_seed, demo_runs, demo_quiet);
        if (serve->parsed())
            return run_serve(load_params(serve_params), serve_port, serve_once, serve_insecure,
                             serve_seed, serve_id);
        if (connect->parsed())
            return run_connect(load_params(conn_params), conn_host, conn_port, conn_sid,
                               conn_insecure, conn_seed, conn_id);
        if (games->parsed())
            return run_games(load_params(games_params), games_game, games_adv, games_trials,
                             games_seed, games_l, games_conf);
        if (keygen->parsed()) return run_pke_keygen(load_params(kg_params), kg_pub, kg_sec, kg_seed);
        if (encrypt->parsed())
            return run_pke_encrypt(load_params(enc_params), enc_pub, enc_m, enc_seed);
        if (decrypt->parsed()) return run_pke_decrypt(load_params(dec_params), dec_sec, dec_ct);
        if (selftest->parsed()) return run_selftest(std::cout, mutate_delta) ? kExitOk : kExitFailure;
    } catch (const BadInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == errc::bad_param_file ? kExitBadInput : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitBadInput;
}
