// Python bindings: the main protocol operations over the BN254 backend.
// Scalars cross the boundary as python ints (via decimal strings), byte
// strings as python bytes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vpe/bench.hpp"
#include "vpe/serialize.hpp"

namespace py = pybind11;
using namespace vpe;

namespace {

Bn254Engine& engine() {
    static Bn254Engine eng;
    return eng;
}

const PrimeField& field() { return engine().field(); }

mpz_class to_mpz(const py::int_& v) {
    return mpz_class(py::str(v).cast<std::string>());
}

py::int_ to_pyint(const mpz_class& v) {
    return py::module_::import("builtins").attr("int")(py::str(v.get_str())).cast<py::int_>();
}

Scalar to_scalar(const py::int_& v) { return field().make(to_mpz(v)); }

Bytes to_bytes_vec(const py::bytes& b) {
    std::string s = b.cast<std::string>();
    return Bytes(s.begin(), s.end());
}

py::bytes to_pybytes(const Bytes& b) {
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

struct PyRng {
    std::shared_ptr<RandomSource> rng;
    explicit PyRng(std::optional<uint64_t> seed)
        : rng(seed ? std::make_shared<RandomSource>(*seed)
                   : std::make_shared<RandomSource>()) {}
};

Polynomial poly_from_list(const std::vector<py::int_>& coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("need at least one coefficient");
    std::vector<Scalar> c;
    c.reserve(coeffs.size());
    for (const auto& v : coeffs) c.push_back(to_scalar(v));
    return Polynomial(std::move(c), &field());
}

// Thin state holders: the C++ structs plus the RNG each side owns.

struct PyVespoEvaluation {
    vespo::Evaluation<Bn254Engine> ev;
};

struct PyVespoChallenge {
    vespo::Challenge ch;
    py::int_ point() const { return to_pyint(ch.point.value()); }
};

struct PyVespoServer {
    vespo::ServerState<Bn254Engine> st;

    PyVespoEvaluation eval(const py::int_& r, unsigned workers) {
        return {vespo::server_eval(engine(), st, to_scalar(r), workers)};
    }
    py::bytes to_bytes() const { return to_pybytes(state::encode(engine(), st)); }
    static PyVespoServer from_bytes(const py::bytes& b) {
        return {state::decode_vespo_server(engine(), to_bytes_vec(b))};
    }
};

struct PyVespoClient {
    vespo::ClientState<Bn254Engine> st;
    PyRng rng{std::nullopt};

    PyVespoChallenge challenge() { return {vespo::client_challenge(st, *rng.rng)}; }
    std::optional<py::int_> verify(const PyVespoChallenge& ch, const PyVespoEvaluation& ev) {
        auto z = vespo::client_verify(engine(), st, ch.ch, ev.ev);
        if (!z) return std::nullopt;
        return to_pyint(z->value());
    }
    bool update(PyVespoServer& server, uint64_t index, const py::int_& delta) {
        auto [req, mask] =
            vespo::client_update_request(engine(), st, index, to_scalar(delta), *rng.rng);
        auto resp = vespo::server_update(server.st, req, mask, engine());
        return vespo::client_update_finish(engine(), st, index, req, mask, resp);
    }
    py::bytes to_bytes() const { return to_pybytes(state::encode(engine(), st)); }
};

std::pair<PyVespoClient, PyVespoServer> vespo_setup(const std::vector<py::int_>& coeffs,
                                                    unsigned lhe_bits,
                                                    std::optional<uint64_t> seed,
                                                    unsigned workers) {
    PyRng rng(seed);
    auto [client, server] = vespo::setup(engine(), poly_from_list(coeffs), lhe_bits, *rng.rng,
                                         workers);
    PyVespoClient pc{std::move(client), PyRng(seed ? std::optional<uint64_t>(*seed + 1)
                                                   : std::nullopt)};
    return {std::move(pc), PyVespoServer{std::move(server)}};
}

// dpor

struct PyDporChallenge {
    dpor::Challenge ch;
    py::int_ point() const { return to_pyint(ch.point.value()); }
};

struct PyDporResponse {
    dpor::AuditResponse<Bn254Engine> resp;
};

struct PyDporServer {
    dpor::ServerState<Bn254Engine> st;

    PyDporResponse audit(const py::int_& r, unsigned workers) {
        return {dpor::server_audit(engine(), st, to_scalar(r), workers)};
    }
    uint64_t rows() const { return st.data.rows(); }
    uint64_t cols() const { return st.data.cols(); }
    py::bytes entry_bytes(uint64_t i, uint64_t k) const {
        auto b = st.data.entry_bytes(i, k);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
    }
    /// Flips raw database bytes behind the protocol's back (for testing
    /// audit soundness against a misbehaving store).
    void corrupt_entry(uint64_t i, uint64_t k, const py::bytes& chunk) {
        st.data.set_entry(i, k, to_bytes_vec(chunk));
    }
};

struct PyDporClient {
    dpor::ClientState<Bn254Engine> st;
    PyRng rng{std::nullopt};

    PyDporChallenge challenge() { return {dpor::client_audit_challenge(st, *rng.rng)}; }
    std::optional<std::string> audit_verify(const PyDporChallenge& ch,
                                            const PyDporResponse& resp) {
        auto rej = dpor::client_audit_verify(engine(), st, ch.ch, resp.resp);
        if (!rej) return std::nullopt;
        return *rej == dpor::AuditReject::kPairing ? "PAIRING_FAIL" : "DOT_FAIL";
    }
    bool update(PyDporServer& server, uint64_t row, uint64_t col, const py::int_& value) {
        dpor::UpdateFetch where{row, col};
        auto reveal = dpor::server_update_fetch(server.st, where);
        auto outcome =
            dpor::client_update(engine(), st, where, to_scalar(value), reveal, *rng.rng);
        if (!outcome.accepted) return false;
        if (outcome.apply) dpor::server_update_apply(server.st, *outcome.apply, engine());
        return true;
    }
};

std::pair<PyDporClient, PyDporServer> dpor_init(const py::bytes& data, const std::string& shape,
                                                unsigned lhe_bits, std::optional<uint64_t> seed,
                                                unsigned workers) {
    dpor::ShapePolicy policy{dpor::ShapeKind::kSquare};
    if (shape == "rect") policy.kind = dpor::ShapeKind::kRect;
    else if (shape != "square") throw std::invalid_argument("shape must be square or rect");
    PyRng rng(seed);
    auto [client, server] =
        dpor::init(engine(), to_bytes_vec(data), policy, lhe_bits, *rng.rng, workers);
    PyDporClient pc{std::move(client),
                    PyRng(seed ? std::optional<uint64_t>(*seed + 1) : std::nullopt)};
    return {std::move(pc), PyDporServer{std::move(server)}};
}

}  // namespace

PYBIND11_MODULE(pyvpe, m) {
    m.doc() = "verifiable polynomial evaluation toolkit (BN254 backend)";

    m.def("group_order", [] { return to_pyint(field().modulus()); },
          "prime order of the pairing groups (the scalar field)");

    m.def("horner_eval",
          [](const std::vector<py::int_>& coeffs, const py::int_& r) {
              return to_pyint(horner_eval(poly_from_list(coeffs), to_scalar(r)).value());
          },
          py::arg("coeffs"), py::arg("r"), "P(r) over the group-order field");

    m.def("merkle_root",
          [](const std::vector<py::bytes>& leaves) {
              std::vector<Bytes> raw;
              raw.reserve(leaves.size());
              for (const auto& l : leaves) raw.push_back(to_bytes_vec(l));
              auto root = merkle::mt_root(raw);
              return py::bytes(reinterpret_cast<const char*>(root.data()), root.size());
          },
          py::arg("leaves"));

    // paillier
    py::class_<lhe::SecretKey>(m, "PaillierKey")
        .def_static("generate",
                    [](unsigned bits, std::optional<uint64_t> seed) {
                        PyRng rng(seed);
                        auto [pk, sk] = lhe::keygen(bits, *rng.rng);
                        return sk;
                    },
                    py::arg("bits"), py::arg("seed") = std::nullopt)
        .def("modulus", [](const lhe::SecretKey& k) { return to_pyint(k.modulus()); })
        .def("encrypt",
             [](const lhe::SecretKey& k, const py::int_& msg, std::optional<uint64_t> seed) {
                 PyRng rng(seed);
                 return k.encrypt(to_mpz(msg), *rng.rng);
             },
             py::arg("msg"), py::arg("seed") = std::nullopt)
        .def("decrypt", [](const lhe::SecretKey& k, const lhe::Ciphertext& c) {
            return to_pyint(k.decrypt(c));
        });
    py::class_<lhe::Ciphertext>(m, "Ciphertext")
        .def("add", &lhe::Ciphertext::add)
        .def("scale",
             [](const lhe::Ciphertext& c, const py::int_& k) { return c.scale(to_mpz(k)); });

    // vespo
    py::class_<PyVespoChallenge>(m, "VespoChallenge").def_property_readonly("point", &PyVespoChallenge::point);
    py::class_<PyVespoEvaluation>(m, "VespoEvaluation");
    py::class_<PyVespoServer>(m, "VespoServer")
        .def("eval", &PyVespoServer::eval, py::arg("r"), py::arg("workers") = 1)
        .def("to_bytes", &PyVespoServer::to_bytes)
        .def_static("from_bytes", &PyVespoServer::from_bytes);
    py::class_<PyVespoClient>(m, "VespoClient")
        .def("challenge", &PyVespoClient::challenge)
        .def("verify", &PyVespoClient::verify, py::arg("challenge"), py::arg("evaluation"))
        .def("update", &PyVespoClient::update, py::arg("server"), py::arg("index"),
             py::arg("delta"))
        .def("to_bytes", &PyVespoClient::to_bytes);
    m.def("vespo_setup", &vespo_setup, py::arg("coeffs"), py::arg("lhe_bits") = 2048,
          py::arg("seed") = std::nullopt, py::arg("workers") = 1,
          "outsource a polynomial for private verified evaluation");

    // dpor
    py::class_<PyDporChallenge>(m, "DporChallenge").def_property_readonly("point", &PyDporChallenge::point);
    py::class_<PyDporResponse>(m, "DporResponse");
    py::class_<PyDporServer>(m, "DporServer")
        .def("audit", &PyDporServer::audit, py::arg("r"), py::arg("workers") = 1)
        .def_property_readonly("rows", &PyDporServer::rows)
        .def_property_readonly("cols", &PyDporServer::cols)
        .def("entry_bytes", &PyDporServer::entry_bytes)
        .def("corrupt_entry", &PyDporServer::corrupt_entry);
    py::class_<PyDporClient>(m, "DporClient")
        .def("challenge", &PyDporClient::challenge)
        .def("audit_verify", &PyDporClient::audit_verify, py::arg("challenge"),
             py::arg("response"))
        .def("update", &PyDporClient::update, py::arg("server"), py::arg("row"), py::arg("col"),
             py::arg("value"));
    m.def("dpor_init", &dpor_init, py::arg("data"), py::arg("shape") = "square",
          py::arg("lhe_bits") = 2048, py::arg("seed") = std::nullopt, py::arg("workers") = 1,
          "initialize a proof-of-retrievability pair over raw bytes");
}
