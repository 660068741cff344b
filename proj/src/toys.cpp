#include <stdexcept>

#include "parrep/protocol.hpp"

namespace parrep {

namespace {
VerifierStep send(Message m = {}) { return {Action::Send, std::move(m)}; }
}  // namespace

VerifierSpec toy_always_accept(int m) {
    VerifierSpec v;
    v.name = "always-accept";
    v.rounds = m;
    v.schema.rows.assign(static_cast<std::size_t>(m), {});
    v.step = [](int, const Column&, const std::vector<Message>&) { return send(); };
    v.verdict = [](const Column&, const std::vector<Message>&) { return true; };
    return v;
}

VerifierSpec toy_coin_guess() {
    VerifierSpec v;
    v.name = "coin-guess";
    v.rounds = 1;
    v.schema.rows = {{uniform_field(2)}};
    v.step = [](int, const Column&, const std::vector<Message>&) { return send(); };
    v.valid_message = [](int, const Message& m) { return m.size() == 1; };
    v.verdict = [](const Column& c, const std::vector<Message>& pm) { return pm.size() == 1 && pm[0][0] == c[0]; };
    return v;
}

ProverStrategy coin_oracle_prover(std::shared_ptr<Column> coins) {
    return stateless_prover([coins](int, const std::vector<OptMessage>&, RngStream&) -> OptMessage {
        return Message{(*coins)[0] & 1};
    });
}

ProverStrategy blind_guess_prover() {
    return stateless_prover([](int, const std::vector<OptMessage>&, RngStream& rng) -> OptMessage {
        return Message{rng.bernoulli(0.5) ? 1 : 0};
    });
}

VerifierSpec toy_diluted_guess(double eps, int m) {
    if (!(eps > 0.0 && eps <= 0.5) || m < 1) throw std::invalid_argument("toy_diluted_guess: need 0 < eps <= 1/2, m >= 1");
    VerifierSpec v;
    v.name = "diluted-guess";
    v.rounds = m;
    // field 0: skip the test (prob 1 - 2 eps); field 1: the secret bit
    v.schema.rows.assign(static_cast<std::size_t>(m), {});
    v.schema.rows[0] = {biased_bit(1.0 - 2.0 * eps), uniform_field(2)};
    v.step = [](int, const Column&, const std::vector<Message>&) { return send(); };
    v.valid_message = [](int r, const Message& msg) { return r > 0 || msg.size() == 1; };
    v.verdict = [](const Column& c, const std::vector<Message>& pm) {
        if ((c[0] & 1) == 1) return true;
        return !pm.empty() && pm[0][0] == (c[0] >> 1);
    };
    return v;
}

VerifierSpec toy_xor_guess() {
    VerifierSpec v;
    v.name = "xor-guess";
    v.rounds = 2;
    // row 0 = a + 2c; row 1 empty
    v.schema.rows = {{uniform_field(2), uniform_field(2)}, {}};
    v.step = [](int r, const Column& c, const std::vector<Message>&) {
        return r == 0 ? send({c[0] & 1}) : send();
    };
    v.valid_message = [](int r, const Message& msg) {
        return r > 0 || (msg.size() == 1 && (msg[0] == 0 || msg[0] == 1));
    };
    v.verdict = [](const Column& c, const std::vector<Message>& pm) {
        return !pm.empty() && pm[0][0] == ((c[0] & 1) ^ (c[0] >> 1));
    };
    return v;
}

PureMultiProver xor_neighbour_oracle(int n) {
    PureMultiProver p;
    p.arity = n;
    p.respond = [n](int r, const std::vector<MessageTuple>& vm) {
        MessageTuple out(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            if (r > 0) {
                out[static_cast<std::size_t>(k)] = Message{};
                continue;
            }
            const auto& nb = vm[0][static_cast<std::size_t>((k + 1) % n)];
            out[static_cast<std::size_t>(k)] = Message{nb ? (*nb)[0] : 0};
        }
        return out;
    };
    return p;
}

VerifierSpec toy_random_messages(int m, int k) {
    if (m < 1 || k < 1) throw std::invalid_argument("toy_random_messages: m, k >= 1");
    VerifierSpec v;
    v.name = "random-messages";
    v.rounds = m;
    v.schema.rows.assign(static_cast<std::size_t>(m), {uniform_field(k)});
    v.step = [](int r, const Column& c, const std::vector<Message>&) { return send({c[static_cast<std::size_t>(r)]}); };
    v.valid_message = [](int, const Message& msg) { return msg.size() == 1; };
    v.verdict = [m](const Column&, const std::vector<Message>& pm) {
        if (static_cast<int>(pm.size()) != m) return false;
        std::int64_t s = 0;
        for (const auto& x : pm) s += x[0];
        return s % 2 == 0;
    };
    return v;
}

ProverStrategy echo_prover() {
    return stateless_prover([](int, const std::vector<OptMessage>& vm, RngStream&) -> OptMessage {
        const auto& last = vm.back();
        return last ? *last : Message{0};
    });
}

std::vector<std::string> toy_names() {
    return {"always-accept", "coin-guess", "diluted-guess", "xor-guess", "random-messages"};
}

VerifierSpec toy_by_name(const std::string& name, const std::vector<double>& params) {
    auto arg = [&](std::size_t k, double dflt) { return k < params.size() ? params[k] : dflt; };
    if (name == "always-accept") return toy_always_accept(static_cast<int>(arg(0, 2)));
    if (name == "coin-guess") return toy_coin_guess();
    if (name == "diluted-guess") return toy_diluted_guess(arg(0, 0.1), static_cast<int>(arg(1, 2)));
    if (name == "xor-guess") return toy_xor_guess();
    if (name == "random-messages") return toy_random_messages(static_cast<int>(arg(0, 2)), static_cast<int>(arg(1, 3)));
    throw std::invalid_argument("unknown toy protocol: " + name);
}

}  // namespace parrep
