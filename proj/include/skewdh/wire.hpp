#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "skewdh/protocol.hpp"

namespace skewdh {

// Byte-stream plumbing shared by the TCP tool and the in-memory tests.
// read(buf, n) must fill exactly n bytes or return false.
using ReadFn = std::function<bool(uint8_t*, size_t)>;
using WriteFn = std::function<bool(const uint8_t*, size_t)>;

// hello: magic | version | 0x00 | 32-byte params digest
inline std::vector<uint8_t> hello_frame(const std::array<uint8_t, 32>& digest) {
    std::vector<uint8_t> out(kWireMagic.begin(), kWireMagic.end());
    out.push_back(kWireVersion);
    out.push_back(kFrameHello);
    out.insert(out.end(), digest.begin(), digest.end());
    return out;
}

// error: magic | version | 0xFF | u16-LE length | UTF-8 reason
inline std::vector<uint8_t> error_frame(const std::string& reason) {
    if (reason.size() > 0xffff) throw std::invalid_argument("reason too long");
    std::vector<uint8_t> out(kWireMagic.begin(), kWireMagic.end());
    out.push_back(kWireVersion);
    out.push_back(kFrameError);
    out.push_back(uint8_t(reason.size() & 0xff));
    out.push_back(uint8_t(reason.size() >> 8));
    out.insert(out.end(), reason.begin(), reason.end());
    return out;
}

struct Frame {
    uint8_t type = 0;
    std::vector<uint8_t> bytes;  // the whole frame, header included
};

// Reads one frame; m is the field degree (fixes the pk length of protocol
// messages). Throws malformed_frame on anything unexpected.
inline Frame read_frame(const ReadFn& read, uint32_t m) {
    Frame f;
    f.bytes.resize(6);
    if (!read(f.bytes.data(), 6)) fail(errc::malformed_frame, "truncated header");
    if (!std::equal(kWireMagic.begin(), kWireMagic.end(), f.bytes.begin()))
        fail(errc::malformed_frame, "bad magic");
    if (f.bytes[4] != kWireVersion) fail(errc::malformed_frame, "unsupported version");
    f.type = f.bytes[5];

    auto read_more = [&](size_t n) {
        size_t at = f.bytes.size();
        f.bytes.resize(at + n);
        if (!read(f.bytes.data() + at, n)) fail(errc::malformed_frame, "truncated frame");
    };

    switch (f.type) {
        case kFrameHello:
            read_more(32);
            break;
        case kFrameInit:
        case kFrameResp: {
            read_more(17);  // sid + sender length
            size_t id_len = f.bytes[22];
            if (id_len == 0) fail(errc::malformed_frame, "empty sender id");
            read_more(id_len + 2 * size_t(m));
            break;
        }
        case kFrameError: {
            read_more(2);
            size_t len = size_t(f.bytes[6]) | (size_t(f.bytes[7]) << 8);
            read_more(len);
            break;
        }
        default:
            fail(errc::malformed_frame, "unknown frame type");
    }
    return f;
}

inline std::string error_frame_reason(const Frame& f) {
    return std::string(f.bytes.begin() + 8, f.bytes.end());
}

struct HandshakeResult {
    bool accepted = false;
    FieldElement key;
    Sid sid{};
    std::string peer;
    std::string abort_reason;                     // errc name when not accepted
    std::vector<std::vector<uint8_t>> sent, received;
};

namespace detail {

inline bool send_frame(HandshakeResult& hs, const WriteFn& write, std::vector<uint8_t> frame) {
    bool ok = write(frame.data(), frame.size());
    hs.sent.push_back(std::move(frame));
    return ok;
}

}  // namespace detail

// Responder side of one handshake over a byte stream. The hello exchange gates
// on the params digest before any public key flows.
inline HandshakeResult serve_handshake(const DomainParams& dp,
                                       const std::array<uint8_t, 32>& digest,
                                       const std::string& self_id, const ReadFn& read,
                                       const WriteFn& write, Rng& rng) {
    HandshakeResult hs;
    Frame hello = read_frame(read, dp.field->m);
    hs.received.push_back(hello.bytes);
    if (hello.type == kFrameError) {
        hs.abort_reason = error_frame_reason(hello);
        return hs;
    }
    if (hello.type != kFrameHello) fail(errc::malformed_frame, "expected hello");
    if (!std::equal(digest.begin(), digest.end(), hello.bytes.begin() + 6)) {
        detail::send_frame(hs, write, error_frame(errc_name(errc::digest_mismatch)));
        hs.abort_reason = errc_name(errc::digest_mismatch);
        return hs;
    }
    if (!detail::send_frame(hs, write, hello_frame(digest)))
        fail(errc::malformed_frame, "peer closed during hello");

    Frame init = read_frame(read, dp.field->m);
    hs.received.push_back(init.bytes);
    if (init.type == kFrameError) {
        hs.abort_reason = error_frame_reason(init);
        return hs;
    }
    DecodedMessage m1 = decode_message(dp.field, init.bytes);
    if (m1.type != kFrameInit) fail(errc::malformed_frame, "expected init message");
    hs.peer = m1.sender;
    hs.sid = m1.sid;

    try {
        auto [session, m2] = respond(dp, self_id, InitMessage{m1.sender, m1.sid, m1.pk}, rng);
        detail::send_frame(hs, write, encode_resp(m2));
        hs.accepted = true;
        hs.key = *session.sk;
    } catch (const error& e) {
        if (e.code() != errc::degenerate_session && e.code() != errc::pk_not_in_orbit) throw;
        detail::send_frame(hs, write, error_frame(errc_name(e.code())));
        hs.abort_reason = errc_name(e.code());
    }
    return hs;
}

// Initiator side: speaks first.
inline HandshakeResult connect_handshake(const DomainParams& dp,
                                         const std::array<uint8_t, 32>& digest,
                                         const std::string& self_id, const Sid& sid,
                                         const ReadFn& read, const WriteFn& write, Rng& rng) {
    HandshakeResult hs;
    hs.sid = sid;
    if (!detail::send_frame(hs, write, hello_frame(digest)))
        fail(errc::malformed_frame, "peer closed during hello");

    Frame hello = read_frame(read, dp.field->m);
    hs.received.push_back(hello.bytes);
    if (hello.type == kFrameError) {
        hs.abort_reason = error_frame_reason(hello);
        return hs;
    }
    if (hello.type != kFrameHello) fail(errc::malformed_frame, "expected hello");
    if (!std::equal(digest.begin(), digest.end(), hello.bytes.begin() + 6)) {
        detail::send_frame(hs, write, error_frame(errc_name(errc::digest_mismatch)));
        hs.abort_reason = errc_name(errc::digest_mismatch);
        return hs;
    }

    auto [session, m1] = initiate(dp, self_id, "peer", sid, rng);
    if (!detail::send_frame(hs, write, encode_init(m1)))
        fail(errc::malformed_frame, "peer closed during init");

    Frame reply = read_frame(read, dp.field->m);
    hs.received.push_back(reply.bytes);
    if (reply.type == kFrameError) {
        hs.abort_reason = error_frame_reason(reply);
        return hs;
    }
    DecodedMessage m2 = decode_message(dp.field, reply.bytes);
    if (m2.type != kFrameResp) fail(errc::malformed_frame, "expected response message");
    hs.peer = m2.sender;
    session.pid.insert(m2.sender);

    try {
        hs.key = finalize(dp, session, RespMessage{m2.sender, m2.sid, m2.pk});
        hs.accepted = true;
    } catch (const error& e) {
        if (e.code() != errc::degenerate_session && e.code() != errc::pk_not_in_orbit &&
            e.code() != errc::sid_mismatch)
            throw;
        hs.abort_reason = errc_name(e.code());
    }
    return hs;
}

}  // namespace skewdh
