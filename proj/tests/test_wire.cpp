#include <catch2/catch_amalgamated.hpp>

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "skewdh/net.hpp"
#include "skewdh/params_io.hpp"
#include "skewdh/wire.hpp"

using namespace skewdh;

namespace {

FieldParamsPtr f4() { return make_field(2, 2, {1, 1, 1}); }

FieldElement el(const FieldParamsPtr& p, uint64_t index) {
    return FieldElement::from_index(p, index);
}

DomainParams worked_params() {
    auto p4 = f4();
    auto tw = make_twist(p4, 1, FieldElement::zero(p4));
    auto orbit = std::make_shared<const OrbitContext>(conjugacy_class(tw, FieldElement::one(p4)));
    auto part = make_w_part(*orbit, std::vector<FieldElement>(3, FieldElement::one(p4)),
                            {FieldElement::one(p4), el(p4, 2), el(p4, 3)});
    return make_domain_params(make_t_params(orbit, {part}, 1));
}

// Blocking in-memory byte pipe; one side per direction.
class BytePipe {
public:
    void write(const uint8_t* data, size_t n) {
        std::lock_guard lock(mu_);
        buf_.insert(buf_.end(), data, data + n);
        cv_.notify_all();
    }
    bool read(uint8_t* out, size_t n) {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return buf_.size() >= n || closed_; });
        if (buf_.size() < n) return false;
        std::copy_n(buf_.begin(), n, out);
        buf_.erase(buf_.begin(), buf_.begin() + ptrdiff_t(n));
        return true;
    }
    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        cv_.notify_all();
    }

    ReadFn reader() {
        return [this](uint8_t* b, size_t n) { return read(b, n); };
    }
    WriteFn writer() {
        return [this](const uint8_t* b, size_t n) {
            write(b, n);
            return true;
        };
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<uint8_t> buf_;
    bool closed_ = false;
};

struct PipedRun {
    HandshakeResult client, server;
};

PipedRun run_piped(const DomainParams& dp_client, const DomainParams& dp_server,
                   uint64_t client_seed, uint64_t server_seed, Sid sid) {
    BytePipe cs, sc;
    auto cdig = params_digest(dp_client);
    auto sdig = params_digest(dp_server);
    PipedRun out;
    std::thread server([&] {
        Rng rng(server_seed);
        out.server = serve_handshake(dp_server, sdig, "server", cs.reader(), sc.writer(), rng);
        sc.close();
    });
    Rng rng(client_seed);
    out.client = connect_handshake(dp_client, cdig, "client", sid, sc.reader(), cs.writer(), rng);
    cs.close();
    server.join();
    return out;
}

Sid fixed_sid() {
    Sid sid{};
    for (size_t i = 0; i < sid.size(); ++i) sid[i] = uint8_t(0x10 + i);
    return sid;
}

std::string frames_hex(const HandshakeResult& client) {
    // canonical transcript order: c->s hello, s->c hello, c->s init, s->c resp
    std::string out;
    for (size_t i = 0; i < std::max(client.sent.size(), client.received.size()); ++i) {
        if (i < client.sent.size()) out += hex(client.sent[i]);
        if (i < client.received.size()) out += hex(client.received[i]);
    }
    return out;
}

}  // namespace

TEST_CASE("frame encoding and parsing") {
    std::array<uint8_t, 32> digest{};
    for (size_t i = 0; i < 32; ++i) digest[i] = uint8_t(i);
    auto hf = hello_frame(digest);
    CHECK(hf.size() == 38);
    CHECK(hf[5] == kFrameHello);

    auto ef = error_frame("DegenerateSession");
    CHECK(ef[5] == kFrameError);
    CHECK(ef.size() == 8 + 17);

    // frame reader over a memory buffer
    std::vector<uint8_t> stream = hf;
    stream.insert(stream.end(), ef.begin(), ef.end());
    size_t pos = 0;
    ReadFn reader = [&](uint8_t* b, size_t n) {
        if (pos + n > stream.size()) return false;
        std::copy_n(stream.begin() + ptrdiff_t(pos), n, b);
        pos += n;
        return true;
    };
    Frame f1 = read_frame(reader, 2);
    CHECK(f1.type == kFrameHello);
    CHECK(f1.bytes == hf);
    Frame f2 = read_frame(reader, 2);
    CHECK(f2.type == kFrameError);
    CHECK(error_frame_reason(f2) == "DegenerateSession");

    // truncation and corruption
    std::vector<uint8_t> short_stream(hf.begin(), hf.begin() + 10);
    pos = 0;
    stream = short_stream;
    CHECK_THROWS_MATCHES(read_frame(reader, 2), error, Catch::Matchers::Predicate<error>(
        [](const error& e) { return e.code() == errc::malformed_frame; }));
    stream = hf;
    stream[0] = 0x58;
    pos = 0;
    CHECK_THROWS_MATCHES(read_frame(reader, 2), error, Catch::Matchers::Predicate<error>(
        [](const error& e) { return e.code() == errc::malformed_frame; }));
    stream = hf;
    stream[4] = 0x02;  // version
    pos = 0;
    CHECK_THROWS_MATCHES(read_frame(reader, 2), error, Catch::Matchers::Predicate<error>(
        [](const error& e) { return e.code() == errc::malformed_frame; }));
}

TEST_CASE("piped handshake agrees on the key") {
    auto dp = worked_params();
    for (uint64_t seed = 0; seed < 12; ++seed) {
        auto run = run_piped(dp, dp, seed * 2 + 1, seed * 2 + 2, fixed_sid());
        REQUIRE(run.client.abort_reason == run.server.abort_reason);
        if (run.client.accepted) {
            REQUIRE(run.server.accepted);
            CHECK(run.client.key == run.server.key);
            CHECK(run.server.peer == "client");
            CHECK(run.client.peer == "server");
            CHECK(run.server.sid == fixed_sid());
        } else {
            CHECK(run.client.abort_reason == "DegenerateSession");
        }
    }
}

TEST_CASE("digest mismatch aborts before any public key flows") {
    auto dp_a = worked_params();
    Rng gen(3);
    auto orbit = dp_a.orbit;
    // same field, different part data -> different digest
    auto dp_b = make_domain_params(
        t_params_gen(std::const_pointer_cast<const OrbitContext>(orbit), 1, 1, gen));
    REQUIRE(params_digest_hex(dp_a) != params_digest_hex(dp_b));

    auto run = run_piped(dp_a, dp_b, 1, 2, fixed_sid());
    CHECK(!run.client.accepted);
    CHECK(!run.server.accepted);
    CHECK(run.server.abort_reason == "DigestMismatch");
    CHECK(run.client.abort_reason == "DigestMismatch");
    // neither side ever put a public key on the wire
    CHECK(run.client.sent.size() == 1);  // just the hello
    for (const auto& frame : run.client.sent) CHECK(frame[5] != kFrameInit);
    REQUIRE(run.server.sent.size() == 1);
    CHECK(run.server.sent[0][5] == kFrameError);
}

TEST_CASE("handshake over loopback TCP") {
    auto dp = worked_params();
    auto digest = params_digest(dp);
    TcpListener listener(0);
    HandshakeResult server_result;
    std::thread server([&] {
        TcpStream conn = listener.accept_one();
        Rng rng(1001);
        server_result = serve_handshake(dp, digest, "server", conn.reader(), conn.writer(), rng);
    });

    TcpStream conn = TcpStream::connect_to("127.0.0.1", listener.port());
    Rng rng(2002);
    auto client_result =
        connect_handshake(dp, digest, "client", fixed_sid(), conn.reader(), conn.writer(), rng);
    server.join();

    REQUIRE(client_result.abort_reason == server_result.abort_reason);
    if (client_result.accepted) {
        CHECK(client_result.key == server_result.key);
    }
}

TEST_CASE("param files round-trip and digests are stable") {
    auto dp = worked_params();
    auto text = params_canonical_text(dp);
    auto reloaded = params_from_json(nlohmann::json::parse(text));
    CHECK(params_canonical_text(reloaded) == text);
    CHECK(params_digest_hex(reloaded) == params_digest_hex(dp));

    // generated params round-trip too
    GenOptions opt;
    opt.p = 2;
    opt.m = 4;
    opt.s = 2;
    opt.n_parts = 2;
    opt.degree = 2;
    opt.seed = 77;
    auto generated = gen_params(opt);
    auto text2 = params_canonical_text(generated);
    auto reloaded2 = params_from_json(nlohmann::json::parse(text2));
    CHECK(params_canonical_text(reloaded2) == text2);

    // corrupt files are rejected
    auto j = nlohmann::json::parse(text);
    j["modulus"] = {1, 0, 1};
    CHECK_THROWS_AS(params_from_json(j), error);
    auto j2 = nlohmann::json::parse(text);
    j2.erase("parts");
    CHECK_THROWS_MATCHES(params_from_json(j2), error, Catch::Matchers::Predicate<error>(
        [](const error& e) { return e.code() == errc::bad_param_file; }));
}

TEST_CASE("gen-params honors the orbit size window") {
    GenOptions opt;
    opt.p = 2;
    opt.m = 2;
    opt.s = 1;
    opt.r_min = 3;
    opt.r_max = 64;
    auto dp = gen_params(opt);
    CHECK(dp.orbit->size() == 3);
    CHECK(!dp.orbit->contains(FieldElement::zero(dp.field)));

    GenOptions opt16;
    opt16.p = 2;
    opt16.m = 4;
    opt16.s = 2;
    auto dp16 = gen_params(opt16);
    CHECK(dp16.orbit->size() == 5);  // (16-1)/gcd(3,15)

    GenOptions bad;
    bad.p = 2;
    bad.m = 1;
    bad.s = 0;
    CHECK_THROWS_MATCHES(gen_params(bad), error, Catch::Matchers::Predicate<error>(
        [](const error& e) { return e.code() == errc::no_suitable_orbit; }));
}

TEST_CASE("secret key files round-trip") {
    auto dp = worked_params();
    Rng rng(55);
    auto P = t_sample(dp.tparams, rng);
    auto j = telement_to_json(P);
    auto back = telement_from_json(dp.tparams, j);
    CHECK(back.c0 == P.c0);
    CHECK(back.values == P.values);

    auto tampered = j;
    tampered["parts"][0]["factors"][0]["dist_i"] = element_to_json(el(dp.field, 3));
    CHECK_THROWS_MATCHES(telement_from_json(dp.tparams, tampered), error,
                         Catch::Matchers::Predicate<error>(
                             [](const error& e) { return e.code() == errc::bad_param_file; }));
}

TEST_CASE("golden transcript replays byte for byte") {
    auto dp = worked_params();
    auto run = run_piped(dp, dp, 0xc11e47, 0x5e27e7, fixed_sid());
    REQUIRE(run.client.accepted);

    // Deterministic wire bytes for (params, sid, seeds), pinned after a
    // hand-verified run: c->s hello | s->c hello | c->s init | s->c resp.
    // The hellos carry the params digest; the init pk decodes to 1, the
    // response pk to t, and the agreed key to t+1.
    const std::string kGolden =
        "534b4448010017c401cf4e20009251c7ca1cf365e79707a6ae385f06d837117129"
        "76f9eb0499534b4448010017c401cf4e20009251c7ca1cf365e79707a6ae385f06"
        "d83711712976f9eb0499534b44480101101112131415161718191a1b1c1d1e1f06"
        "636c69656e7401000000534b44480102101112131415161718191a1b1c1d1e1f06"
        "73657276657200000100";
    CHECK(frames_hex(run.client) == kGolden);
    CHECK(hex(encode(run.client.key)) == "01000100");  // t + 1

    // replaying with identical seeds reproduces every byte
    auto replay = run_piped(dp, dp, 0xc11e47, 0x5e27e7, fixed_sid());
    CHECK(frames_hex(replay.client) == frames_hex(run.client));
    CHECK(replay.client.key == run.client.key);
}
