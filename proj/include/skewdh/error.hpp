#pragma once

#include <stdexcept>
#include <string>

namespace skewdh {

enum class errc {
    // field construction / arithmetic
    not_prime,
    not_monic,
    reducible,
    invalid_field,
    params_mismatch,
    zero_inverse,
    too_large,
    bad_length,
    coefficient_out_of_range,
    // twist / action
    zero_actor,
    zero_value,
    // W / T sets
    orbit_too_small,
    constraint_unsatisfiable,
    zero_direction_unavoidable,
    not_in_orbit,
    context_mismatch,
    // protocol
    pk_not_in_orbit,
    degenerate_session,
    wrong_role,
    already_terminated,
    sid_mismatch,
    // pke
    degenerate_encryption,
    degenerate_ciphertext,
    // security games
    test_on_exposed_session,
    double_test,
    // cli / wire
    no_suitable_orbit,
    digest_mismatch,
    malformed_frame,
    bad_param_file,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::not_prime: return "NotPrime";
        case errc::not_monic: return "NotMonic";
        case errc::reducible: return "Reducible";
        case errc::invalid_field: return "InvalidField";
        case errc::params_mismatch: return "ParamsMismatch";
        case errc::zero_inverse: return "ZeroInverse";
        case errc::too_large: return "TooLarge";
        case errc::bad_length: return "BadLength";
        case errc::coefficient_out_of_range: return "CoefficientOutOfRange";
        case errc::zero_actor: return "ZeroActor";
        case errc::zero_value: return "ZeroValue";
        case errc::orbit_too_small: return "OrbitTooSmall";
        case errc::constraint_unsatisfiable: return "ConstraintUnsatisfiable";
        case errc::zero_direction_unavoidable: return "ZeroDirectionUnavoidable";
        case errc::not_in_orbit: return "NotInOrbit";
        case errc::context_mismatch: return "ContextMismatch";
        case errc::pk_not_in_orbit: return "PkNotInOrbit";
        case errc::degenerate_session: return "DegenerateSession";
        case errc::wrong_role: return "WrongRole";
        case errc::already_terminated: return "AlreadyTerminated";
        case errc::sid_mismatch: return "SidMismatch";
        case errc::degenerate_encryption: return "DegenerateEncryption";
        case errc::degenerate_ciphertext: return "DegenerateCiphertext";
        case errc::test_on_exposed_session: return "TestOnExposedSession";
        case errc::double_test: return "DoubleTest";
        case errc::no_suitable_orbit: return "NoSuitableOrbit";
        case errc::digest_mismatch: return "DigestMismatch";
        case errc::malformed_frame: return "MalformedFrame";
        case errc::bad_param_file: return "BadParamFile";
    }
    return "UnknownError";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what_arg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what_arg), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) {
    throw error(code, msg);
}

}  // namespace skewdh
