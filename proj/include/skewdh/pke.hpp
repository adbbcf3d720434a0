#pragma once

#include <optional>
#include <utility>

#include "skewdh/protocol.hpp"

namespace skewdh {

// Probabilistic encryption on top of the same action: the key-exchange mask
// becomes a one-time pad over F_q.
struct PkeKeyPair {
    FieldElement base;              // the public base point a
    FieldElement pub;               // psi(P, a)
    std::optional<TElement> secret; // erasable
};

struct Ciphertext {
    FieldElement c1, c2;
};

inline PkeKeyPair pke_keygen(const DomainParams& dp, Rng& rng) {
    TElement secret = t_sample(dp.tparams, rng);
    FieldElement pub = derive_pk(dp, secret);
    return PkeKeyPair{dp.base, std::move(pub), std::move(secret)};
}

inline void pke_erase(PkeKeyPair& kp) {
    if (kp.secret) {
        kp.secret->wipe();
        kp.secret.reset();
    }
}

// c1 = psi(Q, a); c2 = mask + m where the mask is the key-schedule value with
// own_pk = c1 and peer_pk = the receiver's public key. The sender controls the
// randomness, so degenerate draws are resampled a bounded number of times.
inline Ciphertext pke_encrypt(const DomainParams& dp, const FieldElement& pub,
                              const FieldElement& m, Rng& rng) {
    if (pub.is_zero() || !dp.orbit->contains(pub))
        fail(errc::not_in_orbit, "receiver public key outside the orbit");
    detail::check_same(m, FieldElement::zero(dp.field));

    for (int attempt = 0; attempt < 64; ++attempt) {
        TElement q = t_sample(dp.tparams, rng);
        FieldElement c1 = derive_pk(dp, q);
        std::optional<FieldElement> mask = derive_key(dp, q, c1, pub);
        q.wipe();
        if (!mask) continue;
        return Ciphertext{std::move(c1), add(*mask, m)};
    }
    fail(errc::degenerate_encryption, "mask factor kept vanishing");
}

// m = c2 - mask'. The receiver cannot resample, so a vanishing mask factor is
// a hard error here.
inline FieldElement pke_decrypt(const DomainParams& dp, const PkeKeyPair& kp,
                                const Ciphertext& ct) {
    if (!kp.secret) throw std::logic_error("secret key has been erased");
    if (!dp.orbit->contains(ct.c1)) fail(errc::not_in_orbit, "c1 outside the orbit");
    std::optional<FieldElement> mask = derive_key(dp, *kp.secret, kp.pub, ct.c1);
    if (!mask) fail(errc::degenerate_ciphertext, "mask factor vanished on decrypt");
    return sub(ct.c2, *mask);
}

// Ciphertext encoding: c1 then c2, 2m bytes each.
inline std::vector<uint8_t> encode_ciphertext(const Ciphertext& ct) {
    std::vector<uint8_t> out = encode(ct.c1);
    std::vector<uint8_t> c2 = encode(ct.c2);
    out.insert(out.end(), c2.begin(), c2.end());
    return out;
}

inline Ciphertext decode_ciphertext(const FieldParamsPtr& params, std::span<const uint8_t> bytes) {
    if (bytes.size() != 4 * size_t(params->m)) fail(errc::bad_length, "expected 4m bytes");
    return Ciphertext{decode(params, bytes.subspan(0, 2 * params->m)),
                      decode(params, bytes.subspan(2 * params->m))};
}

}  // namespace skewdh
