#include "diswap/payoff_io.hpp"

#include "diswap/io.hpp"

#include <filesystem>
#include <stdexcept>

namespace diswap {

namespace {

using nlohmann::json;

Vector vector_field(const json& j, const char* key, Eigen::Index d) {
    if (!j.contains(key)) return Vector::Zero(d);
    const auto& a = j.at(key);
    if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != d)
        throw std::invalid_argument(std::string("payoff: '") + key + "' must be an array of length " + std::to_string(d));
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!a[static_cast<std::size_t>(i)].is_number())
            throw std::invalid_argument(std::string("payoff: '") + key + "' must contain numbers");
        v[i] = a[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

Matrix matrix_field(const json& j, const char* key, Eigen::Index d) {
    if (!j.contains(key)) return Matrix::Zero(d, d);
    const auto& a = j.at(key);
    const std::string shape = std::to_string(d) + "x" + std::to_string(d);
    if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != d)
        throw std::invalid_argument(std::string("payoff: '") + key + "' must be a " + shape + " array");
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        const auto& row = a[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
            throw std::invalid_argument(std::string("payoff: '") + key + "' must be a " + shape + " array");
        for (Eigen::Index c = 0; c < d; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number())
                throw std::invalid_argument(std::string("payoff: '") + key + "' must contain numbers");
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

} // namespace

std::vector<std::string> PayoffSpec::labels() const {
    switch (kind) {
    case Kind::Classic: return {"F"};
    case Kind::Moment: {
        std::vector<std::string> l;
        for (int k = 1; k < moment_n; ++k) l.push_back(power_log_label(k));
        return l;
    }
    default: return payoff->labels();
    }
}

Characteristic PayoffSpec::resolve(const std::function<double()>& X0) const {
    switch (kind) {
    case Kind::Classic: return *classic;
    case Kind::Moment: return moment_payoff(moment_n, moment_X0 ? *moment_X0 : X0());
    default: return *payoff;
    }
}

PayoffSpec parse_payoff(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("payoff: expected a JSON object");
    PayoffSpec spec;
    if (j.contains("classic")) {
        spec.kind = PayoffSpec::Kind::Classic;
        if (!j.at("classic").is_string()) throw std::invalid_argument("payoff: 'classic' must name a characteristic");
        spec.classic = ClassicPayoff{classic_kind_from_string(j.at("classic").get<std::string>())};
        return spec;
    }
    if (j.contains("lv")) {
        spec.kind = PayoffSpec::Kind::LogVariance;
        spec.payoff = log_variance_payoff();
        return spec;
    }
    if (j.contains("moment")) {
        const auto& m = j.at("moment");
        if (!m.is_object() || !m.contains("n") || !m.at("n").is_number_integer())
            throw std::invalid_argument("payoff: 'moment.n' must be an integer");
        spec.kind = PayoffSpec::Kind::Moment;
        spec.moment_n = m.at("n").get<int>();
        if (spec.moment_n < 2) throw std::invalid_argument("payoff: 'moment.n' must be at least 2");
        if (m.contains("X0")) {
            if (!m.at("X0").is_number()) throw std::invalid_argument("payoff: 'moment.X0' must be a number");
            spec.moment_X0 = m.at("X0").get<double>();
            moment_payoff(spec.moment_n, *spec.moment_X0);
        }
        return spec;
    }
    if (j.contains("straddle")) {
        const auto& s = j.at("straddle");
        if (!s.is_object() || !s.contains("strikes") || !s.at("strikes").is_array())
            throw std::invalid_argument("payoff: 'straddle.strikes' must be an array");
        std::vector<double> strikes;
        for (const auto& k : s.at("strikes")) {
            if (!k.is_number()) throw std::invalid_argument("payoff: 'straddle.strikes' must contain numbers");
            strikes.push_back(k.get<double>());
        }
        const auto d = static_cast<Eigen::Index>(strikes.size());
        Matrix w = s.contains("omega_tilde") ? matrix_field(s, "omega_tilde", d) : Matrix::Identity(d, d);
        spec.kind = PayoffSpec::Kind::Straddle;
        spec.payoff = straddle_payoff(w, strikes);
        return spec;
    }
    if (!j.contains("labels") || !j.at("labels").is_array())
        throw std::invalid_argument("payoff: 'labels' must be an array of instrument names");
    std::vector<std::string> labels;
    for (const auto& l : j.at("labels")) {
        if (!l.is_string()) throw std::invalid_argument("payoff: 'labels' must contain strings");
        labels.push_back(l.get<std::string>());
    }
    const auto d = static_cast<Eigen::Index>(labels.size());
    if (j.contains("dim") && (!j.at("dim").is_number_integer() || j.at("dim").get<Eigen::Index>() != d))
        throw std::invalid_argument("payoff: 'dim' disagrees with the number of labels");
    spec.kind = PayoffSpec::Kind::Full;
    spec.payoff = DiPayoff(labels, vector_field(j, "alpha", d), matrix_field(j, "omega", d), vector_field(j, "beta", d),
                           vector_field(j, "gamma", d));
    return spec;
}

PayoffSpec load_payoff(const std::string& file_or_json) {
    std::string text = file_or_json;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
        if (!std::filesystem::exists(file_or_json))
            throw std::invalid_argument("payoff file '" + file_or_json + "' does not exist");
        text = read_file(file_or_json);
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("payoff: malformed JSON: ") + e.what());
    }
    return parse_payoff(j);
}

json to_json(const DiPayoff& payoff) {
    const auto d = payoff.dim();
    json j;
    j["dim"] = d;
    j["labels"] = payoff.labels();
    const auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["alpha"] = vec(payoff.alpha());
    j["beta"] = vec(payoff.beta());
    j["gamma"] = vec(payoff.gamma());
    json omega = json::array();
    for (Eigen::Index r = 0; r < d; ++r) omega.push_back(vec(payoff.omega().row(r).transpose()));
    j["omega"] = omega;
    return j;
}

} // namespace diswap
