#include "contextua/numeric.hpp"

#include "contextua/error.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace contextua {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ContextNotInCover: return "ContextNotInCover";
    case ErrorCode::NotSubcontext: return "NotSubcontext";
    case ErrorCode::IncompatibleProtocols: return "IncompatibleProtocols";
    case ErrorCode::ProtocolMismatch: return "ProtocolMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonScalarRatio: return "NonScalarRatio";
    case ErrorCode::OutcomeLabelMismatch: return "OutcomeLabelMismatch";
    case ErrorCode::AmplitudeCapExceeded: return "AmplitudeCapExceeded";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::InvalidFixedSetting: return "InvalidFixedSetting";
    case ErrorCode::ClosureTooLarge: return "ClosureTooLarge";
    case ErrorCode::ActionNotFree: return "ActionNotFree";
    case ErrorCode::NotActionHomomorphism: return "NotActionHomomorphism";
    case ErrorCode::NoSection: return "NoSection";
    case ErrorCode::CoverDisconnected: return "CoverDisconnected";
    case ErrorCode::MixedOutcomeAlphabets: return "MixedOutcomeAlphabets";
    case ErrorCode::NotAffine: return "NotAffine";
    case ErrorCode::ScenarioMismatch: return "ScenarioMismatch";
    case ErrorCode::DeclarationInconsistent: return "DeclarationInconsistent";
    case ErrorCode::LabelCollision: return "LabelCollision";
    case ErrorCode::UnstructuredSetting: return "UnstructuredSetting";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::SeedSpaceTooLarge: return "SeedSpaceTooLarge";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::HypothesisUnmet: return "HypothesisUnmet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ExperimentFailed: return "ExperimentFailed";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

Rational parse_rational(const std::string& raw) {
    std::string text;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
    require(!text.empty(), ErrorCode::SchemaViolation, "empty rational literal");
    try {
        auto slash = text.find('/');
        if (slash != std::string::npos) {
            Integer num(text.substr(0, slash), 10);
            Integer den(text.substr(slash + 1), 10);
            require(den != 0, ErrorCode::SchemaViolation, "zero denominator in '" + raw + "'");
            Rational q(num, den);
            q.canonicalize();
            return q;
        }
        // Decimal with optional exponent, parsed exactly.
        std::size_t epos = text.find_first_of("eE");
        std::string mantissa = text.substr(0, epos);
        long exponent = 0;
        if (epos != std::string::npos) exponent = std::stol(text.substr(epos + 1));
        bool negative = false;
        if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
            negative = mantissa[0] == '-';
            mantissa = mantissa.substr(1);
        }
        std::string digits;
        long frac_digits = 0;
        bool seen_point = false;
        for (char c : mantissa) {
            if (c == '.') {
                require(!seen_point, ErrorCode::SchemaViolation, "malformed decimal '" + raw + "'");
                seen_point = true;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                digits.push_back(c);
                if (seen_point) ++frac_digits;
            } else {
                fail(ErrorCode::SchemaViolation, "malformed number '" + raw + "'");
            }
        }
        require(!digits.empty(), ErrorCode::SchemaViolation, "malformed number '" + raw + "'");
        Integer num(digits, 10);
        if (negative) num = -num;
        long scale = exponent - frac_digits;
        Integer pow10;
        mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
        Rational q = scale >= 0 ? Rational(num * pow10) : Rational(num, pow10);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::SchemaViolation, "malformed number '" + raw + "'");
    }
}

std::string format_rational(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational rational_from_double(double x) {
    require(std::isfinite(x), ErrorCode::InvalidArgument, "non-finite probability");
    Rational q;
    mpq_set_d(q.get_mpq_t(), x);
    return q;
}

double Prob::to_double() const {
    if (exact()) return std::get<Rational>(v_).get_d();
    return std::get<double>(v_);
}

Rational Prob::to_rational() const {
    if (exact()) return std::get<Rational>(v_);
    return rational_from_double(std::get<double>(v_));
}

bool Prob::is_zero() const {
    if (exact()) return std::get<Rational>(v_) == 0;
    return std::get<double>(v_) == 0.0;
}

Prob& Prob::operator+=(const Prob& o) {
    if (exact() && o.exact())
        std::get<Rational>(v_) += std::get<Rational>(o.v_);
    else
        v_ = to_double() + o.to_double();
    return *this;
}

Prob& Prob::operator-=(const Prob& o) {
    if (exact() && o.exact())
        std::get<Rational>(v_) -= std::get<Rational>(o.v_);
    else
        v_ = to_double() - o.to_double();
    return *this;
}

Prob& Prob::operator*=(const Prob& o) {
    if (exact() && o.exact())
        std::get<Rational>(v_) *= std::get<Rational>(o.v_);
    else
        v_ = to_double() * o.to_double();
    return *this;
}

std::string Prob::to_string() const {
    if (exact()) return format_rational(std::get<Rational>(v_));
    std::ostringstream os;
    os.precision(17);
    os << std::get<double>(v_);
    return os.str();
}

bool all_exact(const std::vector<Prob>& ps) {
    for (const auto& p : ps)
        if (!p.exact()) return false;
    return true;
}

Prob sum(const std::vector<Prob>& ps) {
    Prob total = Prob::zero();
    for (const auto& p : ps) total += p;
    return total;
}

std::size_t radix_product(const std::vector<std::size_t>& radices) {
    std::size_t n = 1;
    for (auto r : radices) {
        if (r != 0 && n > std::numeric_limits<std::size_t>::max() / r)
            fail(ErrorCode::SearchSpaceTooLarge, "mixed-radix space overflows");
        n *= r;
    }
    return n;
}

std::vector<std::size_t> radix_digits(std::size_t index, const std::vector<std::size_t>& radices) {
    std::vector<std::size_t> digits(radices.size());
    for (std::size_t k = radices.size(); k-- > 0;) {
        digits[k] = index % radices[k];
        index /= radices[k];
    }
    return digits;
}

std::size_t radix_index(const std::vector<std::size_t>& digits, const std::vector<std::size_t>& radices) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < radices.size(); ++k) index = index * radices[k] + digits[k];
    return index;
}

}  // namespace contextua
