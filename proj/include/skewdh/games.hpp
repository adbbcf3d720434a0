#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "skewdh/protocol.hpp"
#include "skewdh/stats.hpp"

namespace skewdh {

struct GameConfig {
    DomainParams params;
    uint64_t trials = 1000;
    uint64_t seed = 0;
    double confidence = 0.99;
};

struct AdvantageReport {
    std::string game;
    uint64_t trials = 0;
    uint64_t wins = 0;       // win-rate games
    uint64_t w0 = 0, w1 = 0; // dgsap: "output 1" counts per experiment
    double estimate = 0.0;
    Interval ci;
    double seconds = 0.0;
    uint64_t seed = 0;
};

// One honest protocol run as the challengers see it; degenerate draws are
// redrawn so game distributions are conditioned on protocol success.
struct ChallengeExchange {
    TElement P, Q;
    FieldElement pk1, pk2, key;
};

inline ChallengeExchange sample_exchange(const DomainParams& dp, Rng& rng) {
    for (int attempt = 0; attempt < 1024; ++attempt) {
        TElement P = t_sample(dp.tparams, rng);
        TElement Q = t_sample(dp.tparams, rng);
        FieldElement pk1 = derive_pk(dp, P);
        FieldElement pk2 = derive_pk(dp, Q);
        auto key = derive_key(dp, Q, pk2, pk1);  // k = psi(Q~, pk1)
        if (key) return ChallengeExchange{std::move(P), std::move(Q), std::move(pk1),
                                          std::move(pk2), std::move(*key)};
    }
    fail(errc::degenerate_session, "challenger could not draw a non-degenerate exchange");
}

// ---- adversary interfaces ---------------------------------------------------

using SapAdversary = std::function<std::optional<PointFunction>(const FieldElement& pk, Rng&)>;
using CgsapAdversary =
    std::function<std::optional<FieldElement>(const FieldElement& pk1, const FieldElement& pk2, Rng&)>;
using DgsapAdversary = std::function<int(const FieldElement& pk1, const FieldElement& pk2,
                                         const FieldElement& k, Rng&)>;

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline void guard_bruteforce(const DomainParams& dp) {
    if (dp.field->order == 0 || dp.field->order > (uint64_t(1) << 12))
        fail(errc::too_large, "brute-force adversaries are limited to q <= 2^12");
}

}  // namespace detail

// Recovers some secret scalar consistent with pk (the effective keyspace of a
// normalized-mode secret is its constant factor).
inline std::optional<FieldElement> recover_c0(const DomainParams& dp, const FieldElement& pk) {
    detail::guard_bruteforce(dp);
    const FieldElement& sum_at_base = dp.tparams.direction_sum[0];
    for (const auto& c : enumerate_field(dp.field)) {
        if (c.is_zero()) continue;
        if (phi(dp.twist, mul(c, sum_at_base), dp.base) == pk) return c;
    }
    return std::nullopt;
}

// Recomputes the responder-side key from the two public keys alone.
inline std::optional<FieldElement> recover_key(const DomainParams& dp, const FieldElement& pk1,
                                               const FieldElement& pk2) {
    auto c0 = recover_c0(dp, pk2);
    if (!c0) return std::nullopt;
    auto sum_at = [&](const FieldElement& x) {
        return dp.tparams.direction_sum[dp.orbit->position_of(x)];
    };
    FieldElement c = mul(*c0, add(sum_at(pk1), sum_at(pk2)));
    FieldElement s = power_sum(mul(pk1, pk2), dp.degree);
    FieldElement actor = mul(c, s);
    if (actor.is_zero()) return std::nullopt;
    return phi(dp.twist, actor, pk1);
}

// ---- built-in adversaries ----------------------------------------------------

namespace adversaries {

inline SapAdversary sap_bruteforce(const DomainParams& dp) {
    detail::guard_bruteforce(dp);
    return [dp](const FieldElement& pk, Rng&) -> std::optional<PointFunction> {
        for (const auto& c : enumerate_field(dp.field)) {
            if (c.is_zero()) continue;
            if (phi(dp.twist, c, dp.base) == pk)
                return PointFunction::constant(dp.field, c);
        }
        return std::nullopt;
    };
}

inline SapAdversary sap_const_one(const DomainParams& dp) {
    return [dp](const FieldElement&, Rng&) {
        return std::optional<PointFunction>(
            PointFunction::constant(dp.field, FieldElement::one(dp.field)));
    };
}

// The zero function: psi is undefined on it, so this adversary never wins.
// It realizes the zero-advantage baseline for the search game.
inline SapAdversary sap_zero(const DomainParams& dp) {
    return [dp](const FieldElement&, Rng&) {
        return std::optional<PointFunction>(
            PointFunction::constant(dp.field, FieldElement::zero(dp.field)));
    };
}

inline CgsapAdversary cgsap_bruteforce(const DomainParams& dp) {
    detail::guard_bruteforce(dp);
    return [dp](const FieldElement& pk1, const FieldElement& pk2, Rng&) {
        return recover_key(dp, pk1, pk2);
    };
}

// Abstains; the zero-advantage baseline for the computational game.
inline CgsapAdversary cgsap_abstain() {
    return [](const FieldElement&, const FieldElement&, Rng&) -> std::optional<FieldElement> {
        return std::nullopt;
    };
}

inline CgsapAdversary cgsap_random(const DomainParams& dp) {
    return [dp](const FieldElement&, const FieldElement&, Rng& rng) {
        return std::optional<FieldElement>(random_element(dp.field, rng));
    };
}

inline CgsapAdversary cgsap_constant(FieldElement guess) {
    return [guess](const FieldElement&, const FieldElement&, Rng&) {
        return std::optional<FieldElement>(guess);
    };
}

inline CgsapAdversary cgsap_echo() {
    return [](const FieldElement& pk1, const FieldElement&, Rng&) {
        return std::optional<FieldElement>(pk1);
    };
}

// Recovers the honest key and answers 0 exactly when the challenge key
// matches it.
inline DgsapAdversary dgsap_bruteforce(const DomainParams& dp) {
    detail::guard_bruteforce(dp);
    return [dp](const FieldElement& pk1, const FieldElement& pk2, const FieldElement& k, Rng& rng) {
        auto kstar = recover_key(dp, pk1, pk2);
        if (!kstar) return int(rng.coin());
        return (k == *kstar) ? 0 : 1;
    };
}

inline DgsapAdversary dgsap_coinflip() {
    return [](const FieldElement&, const FieldElement&, const FieldElement&, Rng& rng) {
        return int(rng.coin());
    };
}

inline DgsapAdversary dgsap_const_one() {
    return [](const FieldElement&, const FieldElement&, const FieldElement&, Rng&) { return 1; };
}

}  // namespace adversaries

// ---- the three attack games --------------------------------------------------

// Game 1: the adversary sees pk = psi(P, a) and outputs a function; it wins
// when its function acts on a the same way P does.
inline AdvantageReport sap_game(const GameConfig& cfg, const SapAdversary& adv) {
    detail::Stopwatch watch;
    AdvantageReport rep;
    rep.game = "sap";
    rep.trials = cfg.trials;
    rep.seed = cfg.seed;
    for (uint64_t trial = 0; trial < cfg.trials; ++trial) {
        Rng rng = Rng::derive(cfg.seed, trial);
        TElement P = t_sample(cfg.params.tparams, rng);
        FieldElement pk = derive_pk(cfg.params, P);
        auto answer = adv(pk, rng);
        if (!answer) continue;  // abstention or failure counts as a loss
        const FieldElement& at_base = (*answer)(cfg.params.base);
        if (at_base.is_zero()) continue;  // psi undefined
        if (phi(cfg.params.twist, at_base, cfg.params.base) == pk) ++rep.wins;
    }
    rep.estimate = double(rep.wins) / double(rep.trials);
    rep.ci = wilson(rep.wins, rep.trials, z_for_confidence(cfg.confidence));
    rep.seconds = watch.seconds();
    return rep;
}

// Game 2: the adversary sees both public keys and guesses the session key.
inline AdvantageReport cgsap_game(const GameConfig& cfg, const CgsapAdversary& adv) {
    detail::Stopwatch watch;
    AdvantageReport rep;
    rep.game = "cgsap";
    rep.trials = cfg.trials;
    rep.seed = cfg.seed;
    for (uint64_t trial = 0; trial < cfg.trials; ++trial) {
        Rng rng = Rng::derive(cfg.seed, trial);
        ChallengeExchange ex = sample_exchange(cfg.params, rng);
        auto guess = adv(ex.pk1, ex.pk2, rng);
        if (guess && *guess == ex.key) ++rep.wins;
    }
    rep.estimate = double(rep.wins) / double(rep.trials);
    rep.ci = wilson(rep.wins, rep.trials, z_for_confidence(cfg.confidence));
    rep.seconds = watch.seconds();
    return rep;
}

// Game 3: experiments b = 0 (honest key) and b = 1 (key of a fresh secret);
// the advantage is |Pr[out 1 | b=0] - Pr[out 1 | b=1]|.
inline AdvantageReport dgsap_game(const GameConfig& cfg, const DgsapAdversary& adv) {
    detail::Stopwatch watch;
    AdvantageReport rep;
    rep.game = "dgsap";
    rep.trials = cfg.trials;
    rep.seed = cfg.seed;
    for (int b = 0; b < 2; ++b) {
        for (uint64_t trial = 0; trial < cfg.trials; ++trial) {
            Rng rng = Rng::derive(cfg.seed, uint64_t(b) * cfg.trials + trial);
            ChallengeExchange ex = sample_exchange(cfg.params, rng);
            TElement S = t_sample(cfg.params.tparams, rng);
            FieldElement k1 = derive_pk(cfg.params, S);  // psi(S, a)
            const FieldElement& kb = (b == 0) ? ex.key : k1;
            int out = adv(ex.pk1, ex.pk2, kb, rng);
            if (out == 1) (b == 0 ? rep.w0 : rep.w1)++;
        }
    }
    double z = z_for_confidence(cfg.confidence);
    Interval i0 = wilson(rep.w0, cfg.trials, z);
    Interval i1 = wilson(rep.w1, cfg.trials, z);
    rep.estimate =
        std::fabs(double(rep.w0) / double(cfg.trials) - double(rep.w1) / double(cfg.trials));
    rep.ci = abs_difference(i0, i1);
    rep.seconds = watch.seconds();
    return rep;
}

// ---- authenticated-links oracle harness ---------------------------------------

// The adversary schedules protocol runs but cannot craft or alter messages:
// every entry point below takes session/message handles, never bytes.
class AmOracle {
public:
    virtual ~AmOracle() = default;
    virtual uint32_t session_limit() const = 0;
    virtual uint32_t execute() = 0;  // next honest session between the fixed pair
    virtual std::pair<FieldElement, FieldElement> session_pks(uint32_t session) const = 0;
    virtual FieldElement test(uint32_t session) = 0;  // single use
};

using AmAdversary = std::function<int(AmOracle&, Rng&)>;

struct AmConfig {
    std::vector<std::string> parties{"U1", "U2"};
    uint32_t session_bound = 1;  // l
};

class AmHarness final : public AmOracle {
public:
    AmHarness(const DomainParams& dp, AmConfig cfg, uint64_t seed)
        : dp_(dp), cfg_(std::move(cfg)), rng_(seed) {
        if (cfg_.parties.size() < 2) throw std::invalid_argument("need at least two parties");
        if (cfg_.session_bound < 1) throw std::invalid_argument("session bound must be >= 1");
    }

    uint32_t session_limit() const override { return cfg_.session_bound; }

    // Execute oracle: a complete honest run between two parties.
    uint32_t execute(const std::string& ui, const std::string& uj) {
        for (int attempt = 0; attempt < 1024; ++attempt) {
            Sid sid = next_sid();
            auto [is, m1] = initiate(dp_, ui, uj, sid, rng_);
            try {
                auto [rs, m2] = respond(dp_, uj, m1, rng_);
                finalize(dp_, is, m2);
                Session rec;
                rec.initiator = std::move(is);
                rec.responder = std::move(rs);
                rec.m1_bytes = encode_init(m1);
                rec.m2_bytes = encode_resp(m2);
                rec.parties = {ui, uj};
                sessions_.push_back(std::move(rec));
                return uint32_t(sessions_.size() - 1);
            } catch (const error& e) {
                if (e.code() != errc::degenerate_session) throw;
            }
        }
        fail(errc::degenerate_session, "could not execute a non-degenerate session");
    }

    uint32_t execute() override { return execute(cfg_.parties[0], cfg_.parties[1]); }

    std::pair<FieldElement, FieldElement> session_pks(uint32_t session) const override {
        const Session& s = sessions_.at(session);
        return {*s.initiator.own_pk, *s.responder.own_pk};
    }

    const std::vector<uint8_t>& transcript_m1(uint32_t session) const {
        return sessions_.at(session).m1_bytes;
    }
    const std::vector<uint8_t>& transcript_m2(uint32_t session) const {
        return sessions_.at(session).m2_bytes;
    }
    const SessionInstance& session_initiator(uint32_t session) const {
        return sessions_.at(session).initiator;
    }
    const SessionInstance& session_responder(uint32_t session) const {
        return sessions_.at(session).responder;
    }

    // Reveal oracle: the stored session key. Exposes the session.
    FieldElement reveal(uint32_t session) {
        const Session& s = sessions_.at(session);
        if (tested_ && *tested_ == session)
            fail(errc::test_on_exposed_session, "the test session cannot be exposed");
        revealed_.insert(session);
        return *s.responder.sk;
    }

    // Corrupt oracle: the party's stored secrets. The protocol has no long-term
    // keys, so this returns the erasable secrets of the party's unfinished
    // instances (completed sessions have erased theirs already).
    std::vector<TElement> corrupt(const std::string& party) {
        corrupted_.insert(party);
        std::vector<TElement> out;
        for (const auto& inst : pending_)
            if (inst.owner == party && inst.state.secret) out.push_back(*inst.state.secret);
        return out;
    }

    // Test oracle: single use, only on unexposed sessions. On b = 1 the key is
    // replaced by the action value of a fresh secret, matching the decisional
    // game's random world.
    FieldElement test(uint32_t session) override {
        const Session& s = sessions_.at(session);
        if (tested_) fail(errc::double_test, "test oracle is single-use");
        if (revealed_.count(session) || corrupted_.count(*s.parties.begin()) ||
            corrupted_.count(*s.parties.rbegin()))
            fail(errc::test_on_exposed_session, "session already exposed");
        tested_ = session;
        test_bit_ = int(rng_.coin());
        if (test_bit_ == 0) return *s.responder.sk;
        TElement fresh = t_sample(dp_.tparams, rng_);
        return derive_pk(dp_, fresh);
    }

    bool test_used() const { return tested_.has_value(); }
    int test_bit() const { return test_bit_; }

    // ---- message-driven interface (Send) ----
    // Starting an instance produces a message handle; the adversary may deliver
    // it, hold it back, or reorder deliveries. There is no way to feed bytes in.
    uint32_t send_init(const std::string& from, const std::string& to) {
        Sid sid = next_sid();
        auto [is, m1] = initiate(dp_, from, to, sid, rng_);
        pending_.push_back(Pending{std::move(is), from});
        uint32_t inst = uint32_t(pending_.size() - 1);
        messages_.push_back(Message{kFrameInit, m1, RespMessage{}, inst, to, false});
        return uint32_t(messages_.size() - 1);
    }

    // Delivers a pending message; returns the handle of the reply, if any.
    std::optional<uint32_t> deliver(uint32_t handle) {
        Message& msg = messages_.at(handle);
        if (msg.delivered) return std::nullopt;
        msg.delivered = true;
        if (msg.type == kFrameInit) {
            try {
                auto [rs, m2] = respond(dp_, msg.to, msg.init, rng_);
                pending_.push_back(Pending{std::move(rs), msg.to});
                messages_.push_back(
                    Message{kFrameResp, InitMessage{}, m2, msg.src_instance, msg.init.sender, false});
                return uint32_t(messages_.size() - 1);
            } catch (const error& e) {
                if (e.code() != errc::degenerate_session) throw;
                return std::nullopt;
            }
        }
        try {
            finalize(dp_, pending_.at(msg.src_instance).state, msg.resp);
        } catch (const error& e) {
            if (e.code() != errc::degenerate_session) throw;
        }
        return std::nullopt;
    }

    const SessionInstance& instance(uint32_t idx) const { return pending_.at(idx).state; }

private:
    struct Session {
        SessionInstance initiator, responder;
        std::vector<uint8_t> m1_bytes, m2_bytes;
        std::set<std::string> parties;
    };
    struct Pending {
        SessionInstance state;
        std::string owner;
    };
    struct Message {
        uint8_t type;
        InitMessage init;
        RespMessage resp;
        uint32_t src_instance;  // instance that should receive the eventual reply
        std::string to;
        bool delivered;
    };

    Sid next_sid() {
        Sid sid{};
        for (size_t i = 0; i < sid.size(); i += 8) {
            uint64_t w = rng_.next();
            for (size_t j = 0; j < 8; ++j) sid[i + j] = uint8_t(w >> (8 * j));
        }
        return sid;
    }

    DomainParams dp_;
    AmConfig cfg_;
    Rng rng_;
    std::vector<Session> sessions_;
    std::vector<Pending> pending_;
    std::vector<Message> messages_;
    std::set<uint32_t> revealed_;
    std::set<std::string> corrupted_;
    std::optional<uint32_t> tested_;
    int test_bit_ = 0;
};

// SKadv = |Pr[guess = b] - 1/2|. An adversary that never issues Test forfeits:
// the bit and the guess are both drawn at random.
inline AdvantageReport sk_experiment(const DomainParams& dp, const AmConfig& amcfg,
                                     const AmAdversary& adv, uint64_t trials, uint64_t seed,
                                     double confidence = 0.99) {
    detail::Stopwatch watch;
    AdvantageReport rep;
    rep.game = "sk-am";
    rep.trials = trials;
    rep.seed = seed;
    for (uint64_t trial = 0; trial < trials; ++trial) {
        Rng trial_rng = Rng::derive(seed, trial);
        AmHarness harness(dp, amcfg, trial_rng.next());
        Rng adv_rng(trial_rng.next());
        int guess = adv(harness, adv_rng);
        int b;
        if (harness.test_used()) {
            b = harness.test_bit();
        } else {
            b = int(trial_rng.coin());
            guess = int(trial_rng.coin());
        }
        if (guess == b) ++rep.wins;
    }
    double z = z_for_confidence(confidence);
    Interval guess_rate = wilson(rep.wins, trials, z);
    rep.estimate = std::fabs(double(rep.wins) / double(trials) - 0.5);
    rep.ci = abs_offset(guess_rate, 0.5);
    rep.seconds = watch.seconds();
    return rep;
}

// The reduction: embeds the decisional challenge into the r-th of l simulated
// sessions. If the adversary tests exactly that session it is answered with
// the challenge key and its bit is forwarded; otherwise the distinguisher
// outputs a fair coin.
class ReductionSimulator final : public AmOracle {
public:
    struct MissedTest {};

    ReductionSimulator(const DomainParams& dp, uint32_t limit, uint32_t embedded,
                       FieldElement pk1, FieldElement pk2, FieldElement k, uint64_t seed)
        : dp_(dp), limit_(limit), embedded_(embedded), pk1_(std::move(pk1)),
          pk2_(std::move(pk2)), k_(std::move(k)), rng_(seed) {}

    uint32_t session_limit() const override { return limit_; }

    uint32_t execute() override {
        uint32_t id = uint32_t(pks_.size());
        if (id == embedded_) {
            pks_.emplace_back(pk1_, pk2_);
        } else {
            ChallengeExchange ex = sample_exchange(dp_, rng_);
            pks_.emplace_back(ex.pk1, ex.pk2);
        }
        return id;
    }

    std::pair<FieldElement, FieldElement> session_pks(uint32_t session) const override {
        return pks_.at(session);
    }

    FieldElement test(uint32_t session) override {
        if (tested_) fail(errc::double_test, "test oracle is single-use");
        tested_ = session;
        if (session == embedded_) return k_;
        throw MissedTest{};
    }

    bool hit_embedded() const { return tested_ && *tested_ == embedded_; }

private:
    DomainParams dp_;
    uint32_t limit_, embedded_;
    FieldElement pk1_, pk2_, k_;
    Rng rng_;
    std::vector<std::pair<FieldElement, FieldElement>> pks_;
    std::optional<uint32_t> tested_;
};

inline DgsapAdversary reduction_distinguisher(const DomainParams& dp, const AmConfig& amcfg,
                                              AmAdversary adv) {
    const uint32_t l = amcfg.session_bound;
    return [dp, l, adv](const FieldElement& pk1, const FieldElement& pk2, const FieldElement& k,
                        Rng& rng) -> int {
        uint32_t embedded = uint32_t(rng.below(l));
        ReductionSimulator sim(dp, l, embedded, pk1, pk2, k, rng.next());
        Rng adv_rng(rng.next());
        try {
            int d = adv(sim, adv_rng);
            if (sim.hit_embedded()) return d;
        } catch (const ReductionSimulator::MissedTest&) {
        }
        return int(rng.coin());
    };
}

// Win rate of a distinguisher against the decisional challenger (b drawn per
// trial, win when the output equals b). This is the quantity the reduction
// argument predicts as 1/2 + eps/l.
inline AdvantageReport reduction_win_rate(const GameConfig& cfg, const DgsapAdversary& dist) {
    detail::Stopwatch watch;
    AdvantageReport rep;
    rep.game = "reduction";
    rep.trials = cfg.trials;
    rep.seed = cfg.seed;
    for (uint64_t trial = 0; trial < cfg.trials; ++trial) {
        Rng rng = Rng::derive(cfg.seed, trial);
        int b = int(rng.coin());
        ChallengeExchange ex = sample_exchange(cfg.params, rng);
        TElement S = t_sample(cfg.params.tparams, rng);
        FieldElement k1 = derive_pk(cfg.params, S);
        const FieldElement& kb = (b == 0) ? ex.key : k1;
        int d = dist(ex.pk1, ex.pk2, kb, rng);
        if (d == b) ++rep.wins;
    }
    rep.estimate = double(rep.wins) / double(cfg.trials);
    rep.ci = wilson(rep.wins, cfg.trials, z_for_confidence(cfg.confidence));
    rep.seconds = watch.seconds();
    return rep;
}

// ---- built-in AM adversaries --------------------------------------------------

namespace adversaries {

// Runs l sessions, tests one uniformly at random, recovers the honest key of
// that session by brute force and answers 0 exactly on a match.
inline AmAdversary am_bruteforce(const DomainParams& dp) {
    detail::guard_bruteforce(dp);
    return [dp](AmOracle& oracle, Rng& rng) -> int {
        const uint32_t l = oracle.session_limit();
        for (uint32_t i = 0; i < l; ++i) oracle.execute();
        uint32_t target = uint32_t(rng.below(l));
        auto [pk1, pk2] = oracle.session_pks(target);
        auto kstar = recover_key(dp, pk1, pk2);
        FieldElement kt = oracle.test(target);
        if (!kstar) return int(rng.coin());
        return (kt == *kstar) ? 0 : 1;
    };
}

inline AmAdversary am_coinflip() {
    return [](AmOracle& oracle, Rng& rng) -> int {
        const uint32_t l = oracle.session_limit();
        for (uint32_t i = 0; i < l; ++i) oracle.execute();
        oracle.test(uint32_t(rng.below(l)));
        return int(rng.coin());
    };
}

}  // namespace adversaries

}  // namespace skewdh
