#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skewdh/tset.hpp"

namespace skewdh {

// Public domain parameters of one deployment: the field, the twist, the base
// point with its orbit, and the T(X) construction data.
struct DomainParams {
    FieldParamsPtr field;
    Twist twist;
    FieldElement base;
    std::shared_ptr<const OrbitContext> orbit;
    TParams tparams;
    uint32_t degree = 0;
};

inline DomainParams make_domain_params(TParams tparams) {
    const auto& orbit = tparams.orbit;
    if (orbit->size() < 2) fail(errc::orbit_too_small, "need at least two orbit points");
    DomainParams dp;
    dp.field = orbit->twist.params;
    dp.twist = orbit->twist;
    dp.base = orbit->points[0];
    dp.orbit = orbit;
    dp.degree = tparams.degree;
    dp.tparams = std::move(tparams);
    return dp;
}

using Sid = std::array<uint8_t, 16>;

struct InitMessage {
    std::string sender;
    Sid sid{};
    FieldElement pk;
};

struct RespMessage {
    std::string sender;
    Sid sid{};
    FieldElement pk;
};

// ---- bit-exact wire format ------------------------------------------------
// magic "SKDH", version 0x01, type byte, then the type-specific body.
// init/resp: sid (16) | sender length (1) | sender UTF-8 | pk (2m bytes).

inline constexpr std::array<uint8_t, 4> kWireMagic{0x53, 0x4B, 0x44, 0x48};
inline constexpr uint8_t kWireVersion = 0x01;
inline constexpr uint8_t kFrameHello = 0x00;
inline constexpr uint8_t kFrameInit = 0x01;
inline constexpr uint8_t kFrameResp = 0x02;
inline constexpr uint8_t kFrameError = 0xFF;

namespace detail {

inline std::vector<uint8_t> encode_message(uint8_t type, const std::string& sender, const Sid& sid,
                                           const FieldElement& pk) {
    if (sender.empty() || sender.size() > 255)
        throw std::invalid_argument("sender id must be 1..255 bytes");
    std::vector<uint8_t> out;
    out.insert(out.end(), kWireMagic.begin(), kWireMagic.end());
    out.push_back(kWireVersion);
    out.push_back(type);
    out.insert(out.end(), sid.begin(), sid.end());
    out.push_back(uint8_t(sender.size()));
    out.insert(out.end(), sender.begin(), sender.end());
    std::vector<uint8_t> pk_bytes = encode(pk);
    out.insert(out.end(), pk_bytes.begin(), pk_bytes.end());
    return out;
}

}  // namespace detail

inline std::vector<uint8_t> encode_init(const InitMessage& m) {
    return detail::encode_message(kFrameInit, m.sender, m.sid, m.pk);
}

inline std::vector<uint8_t> encode_resp(const RespMessage& m) {
    return detail::encode_message(kFrameResp, m.sender, m.sid, m.pk);
}

struct DecodedMessage {
    uint8_t type = 0;
    std::string sender;
    Sid sid{};
    FieldElement pk;
};

inline DecodedMessage decode_message(const FieldParamsPtr& params, std::span<const uint8_t> bytes) {
    if (bytes.size() < 4 + 1 + 1 + 16 + 1) fail(errc::malformed_frame, "message too short");
    if (!std::equal(kWireMagic.begin(), kWireMagic.end(), bytes.begin()))
        fail(errc::malformed_frame, "bad magic");
    if (bytes[4] != kWireVersion) fail(errc::malformed_frame, "unsupported version");
    DecodedMessage out;
    out.type = bytes[5];
    if (out.type != kFrameInit && out.type != kFrameResp)
        fail(errc::malformed_frame, "not a protocol message");
    std::copy(bytes.begin() + 6, bytes.begin() + 22, out.sid.begin());
    size_t id_len = bytes[22];
    size_t expected = 23 + id_len + 2 * size_t(params->m);
    if (id_len == 0 || bytes.size() != expected) fail(errc::malformed_frame, "bad message length");
    out.sender.assign(bytes.begin() + 23, bytes.begin() + 23 + ptrdiff_t(id_len));
    out.pk = decode(params, bytes.subspan(23 + id_len));
    return out;
}

// ---- session state machine -------------------------------------------------

enum class Role { initiator, responder };

struct SessionInstance {
    std::set<std::string> pid;           // both peers' identities
    bool used = false;                   // set on first protocol step, never reverts
    std::optional<FieldElement> sk;      // session key; only set once accepted
    Sid sid{};
    bool acc = false;
    bool term = false;
    Role role = Role::initiator;
    std::optional<TElement> secret;      // erasable
    std::optional<FieldElement> own_pk, peer_pk;
};

// Zeroizes and drops the per-session secret. Idempotent.
inline void erase_secret(SessionInstance& s) {
    if (s.secret) {
        s.secret->wipe();
        s.secret.reset();
    }
}

inline FieldElement derive_pk(const DomainParams& dp, const TElement& secret) {
    return phi(dp.twist, t_value_at(secret, dp.base), dp.base);
}

// The shared key schedule used by both roles: with c = T(pk_peer) + T(pk_own)
// and S = sum_{k=0..d} (pk_own pk_peer)^k, the key is phi(c*S, pk_peer).
// Plain powers keep S symmetric in the two public keys, which is what makes
// the two directions agree. Returns nullopt when c*S = 0 (degenerate run).
inline std::optional<FieldElement> derive_key(const DomainParams& dp, const TElement& secret,
                                              const FieldElement& own_pk,
                                              const FieldElement& peer_pk) {
    FieldElement c = add(t_value_at(secret, peer_pk), t_value_at(secret, own_pk));
    FieldElement s = power_sum(mul(own_pk, peer_pk), dp.degree);
    FieldElement actor = mul(c, s);
    if (actor.is_zero()) return std::nullopt;
    return phi(dp.twist, actor, peer_pk);
}

namespace detail {

inline void check_peer_pk(const DomainParams& dp, const FieldElement& pk) {
    if (pk.is_zero() || !dp.orbit->contains(pk))
        fail(errc::pk_not_in_orbit, "peer public key rejected");
}

}  // namespace detail

inline std::pair<SessionInstance, InitMessage> initiate(const DomainParams& dp,
                                                        const std::string& self,
                                                        const std::string& peer, const Sid& sid,
                                                        Rng& rng) {
    TElement secret = t_sample(dp.tparams, rng);
    FieldElement pk = derive_pk(dp, secret);

    SessionInstance s;
    s.pid = {self, peer};
    s.used = true;
    s.sid = sid;
    s.role = Role::initiator;
    s.own_pk = pk;
    s.secret = std::move(secret);
    return {std::move(s), InitMessage{self, sid, std::move(pk)}};
}

// Responder step: answers with its own public key, derives the key, erases the
// secret and accepts. Throws degenerate_session when the mask factor vanishes
// (the run aborts, no message is produced).
inline std::pair<SessionInstance, RespMessage> respond(const DomainParams& dp,
                                                       const std::string& self,
                                                       const InitMessage& msg, Rng& rng) {
    detail::check_peer_pk(dp, msg.pk);

    SessionInstance s;
    s.pid = {self, msg.sender};
    s.used = true;
    s.sid = msg.sid;
    s.role = Role::responder;
    s.peer_pk = msg.pk;

    TElement secret = t_sample(dp.tparams, rng);
    FieldElement pk = derive_pk(dp, secret);
    s.own_pk = pk;

    std::optional<FieldElement> key = derive_key(dp, secret, pk, msg.pk);
    secret.wipe();  // erased before the key is output
    if (!key) {
        s.term = true;
        fail(errc::degenerate_session, "mask factor vanished on respond");
    }
    s.sk = std::move(*key);
    s.acc = true;
    s.term = true;
    return {std::move(s), RespMessage{self, msg.sid, std::move(pk)}};
}

// Initiator completion. On a degenerate run the instance terminates without
// accepting and the secret is still erased.
inline FieldElement finalize(const DomainParams& dp, SessionInstance& s, const RespMessage& msg) {
    if (s.role != Role::initiator) fail(errc::wrong_role, "finalize is an initiator step");
    if (s.term) fail(errc::already_terminated, "session already terminated");
    if (!s.secret || !s.own_pk) fail(errc::already_terminated, "no secret to finalize with");
    if (msg.sid != s.sid) fail(errc::sid_mismatch, "response belongs to a different session");
    detail::check_peer_pk(dp, msg.pk);

    s.peer_pk = msg.pk;
    std::optional<FieldElement> key = derive_key(dp, *s.secret, *s.own_pk, msg.pk);
    erase_secret(s);
    if (!key) {
        s.term = true;
        fail(errc::degenerate_session, "mask factor vanished on finalize");
    }
    s.sk = *key;
    s.acc = true;
    s.term = true;
    return *key;
}

}  // namespace skewdh
