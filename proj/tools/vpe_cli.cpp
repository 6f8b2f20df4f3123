// vpe: verifiable polynomial evaluation toolkit CLI.
//
// Drives the client/server/verifier state machines of the four protocols
// (ckzg, pubdyn, vespo, dpor) over state files, exchanges protocol
// messages through wire frames (materialized as files locally, or over a
// TCP socket with --connect/--listen), and hosts the benchmark harness.
//
// Exit codes: 0 accept/success, 2 verification reject (with a reason code
// MERKLE_FAIL | PAIRING_FAIL | DOT_FAIL), 1 operational error.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <variant>

#include "vpe/bench.hpp"
#include "vpe/wire.hpp"

namespace fs = std::filesystem;
using namespace vpe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitReject = 2;

struct RejectError : std::runtime_error {
    explicit RejectError(const std::string& code) : std::runtime_error(code) {}
};

// -- engine registry ----------------------------------------------------------
// Engines own the scalar field that every Scalar points into, so they are
// kept alive for the whole process.

Bn254Engine& bn254_engine() {
    static Bn254Engine eng;
    return eng;
}

MockEngine& mock_engine(const mpz_class& order) {
    static std::map<std::string, std::unique_ptr<MockEngine>> cache;
    auto key = order.get_str();
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<MockEngine>(order)).first;
    return *it->second;
}

template <typename Fn>
auto with_engine(const std::string& curve_id, Fn&& fn) {
    if (curve_id == "bn254") return fn(bn254_engine());
    if (curve_id == "mock") return fn(mock_engine(mpz_class(bn254::kGroupOrderDec)));
    if (curve_id.rfind("mock-", 0) == 0) {
        mpz_class order;
        try {
            order = mpz_class(curve_id.substr(5));
        } catch (const std::exception&) {
            throw std::invalid_argument("invalid curve id: " + curve_id);
        }
        return fn(mock_engine(order));
    }
    throw std::invalid_argument("invalid curve id: " + curve_id +
                                " (expected bn254, mock or mock-<prime>)");
}

// -- state directory ----------------------------------------------------------

struct StateDir {
    fs::path dir;

    fs::path client() const { return dir / "client.state"; }
    fs::path server() const { return dir / "server.state"; }
    fs::path bulletin() const { return dir / "bulletin.state"; }
    fs::path database() const { return dir / "database.vdb"; }
    fs::path audit_log() const { return dir / "audit.log"; }
    fs::path msg_dir() const { return dir / "msg"; }
};

state::ContainerInfo load_info(const fs::path& p) {
    return state::unpack_container(state::read_file(p.string())).first;
}

std::pair<state::ContainerInfo, Bytes> load_state(const fs::path& p, state::Role want) {
    auto [info, payload] = state::unpack_container(state::read_file(p.string()));
    if (info.role != want) throw std::runtime_error("state file has the wrong role: " + p.string());
    return {std::move(info), std::move(payload)};
}

void append_audit_log(const StateDir& sd, const Scalar& r, const std::string& outcome) {
    std::ofstream log(sd.audit_log(), std::ios::app);
    char buf[32];
    std::time_t now = std::time(nullptr);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    log << buf << '\t' << to_hex(r.to_bytes()) << '\t' << outcome << '\n';
}

// -- server host: answers wire frames against loaded server state -------------

template <typename E>
class ServerHost {
public:
    ServerHost(const E& eng, StateDir sd) : eng_(eng), sd_(std::move(sd)), sym_(eng) {
        auto [info, payload] = load_state(sd_.server(), state::Role::kServer);
        info_ = info;
        switch (info.protocol) {
            case state::Protocol::kCkzg:
                st_ = state::decode_ckzg_server(eng_, payload);
                break;
            case state::Protocol::kPubdyn:
                st_ = state::decode_pubdyn_server(sym_, payload);
                break;
            case state::Protocol::kVespo:
                st_ = state::decode_vespo_server(eng_, payload);
                break;
            case state::Protocol::kDpor: {
                auto db = state::decode_database(state::read_file(sd_.database().string()),
                                                 eng_.field());
                st_ = state::decode_dpor_server(eng_, payload, std::move(db));
                break;
            }
        }
    }

    Bytes handle(BytesView frame, unsigned workers) {
        try {
            auto [type, payload] = wire::unpack_frame(frame);
            return dispatch(type, payload, workers);
        } catch (const std::exception& e) {
            return wire::error_frame("BAD_REQUEST", e.what());
        }
    }

    void save() {
        Bytes payload;
        if (auto* s = std::get_if<ckzg::ServerState<E>>(&st_)) payload = state::encode(eng_, *s);
        if (auto* s = std::get_if<pubdyn::ServerState<E>>(&st_)) payload = state::encode(sym_, *s);
        if (auto* s = std::get_if<vespo::ServerState<E>>(&st_)) payload = state::encode(eng_, *s);
        if (auto* s = std::get_if<dpor::ServerState<E>>(&st_)) {
            payload = state::encode(eng_, *s);
            state::write_file(sd_.database().string(), state::encode_database(s->data));
        }
        state::write_file(sd_.server().string(), state::pack_container(info_, payload));
    }

private:
    Bytes dispatch(wire::MsgType type, BytesView payload, unsigned workers) {
        const PrimeField& f = eng_.field();
        switch (type) {
            case wire::MsgType::kEvalReq: {
                Scalar r = wire::decode_eval_req(payload, f);
                if (auto* s = std::get_if<ckzg::ServerState<E>>(&st_))
                    return wire::pack_frame(wire::MsgType::kEvalResp,
                                            wire::encode_eval_resp(eng_, ckzg::eval(eng_, *s, r, workers)));
                if (auto* s = std::get_if<pubdyn::ServerState<E>>(&st_))
                    return wire::pack_frame(wire::MsgType::kEvalResp,
                                            wire::encode_eval_resp(sym_, pubdyn::eval(sym_, *s, r, workers)));
                if (auto* s = std::get_if<vespo::ServerState<E>>(&st_))
                    return wire::pack_frame(
                        wire::MsgType::kEvalResp,
                        wire::encode_eval_resp(eng_, vespo::server_eval(eng_, *s, r, workers)));
                break;
            }
            case wire::MsgType::kAuditReq: {
                Scalar r = wire::decode_eval_req(payload, f);
                if (auto* s = std::get_if<dpor::ServerState<E>>(&st_))
                    return wire::pack_frame(
                        wire::MsgType::kAuditResp,
                        wire::encode_audit_resp(eng_, dpor::server_audit(eng_, *s, r, workers)));
                break;
            }
            case wire::MsgType::kUpdateReq: {
                if (auto* s = std::get_if<pubdyn::ServerState<E>>(&st_)) {
                    auto [i, delta] = wire::decode_pubdyn_update_req(payload, f);
                    auto resp = pubdyn::server_update(*s, i, delta);
                    save();
                    return wire::pack_frame(wire::MsgType::kUpdateResp,
                                            wire::encode_pubdyn_update_resp(sym_, resp));
                }
                if (auto* s = std::get_if<vespo::ServerState<E>>(&st_)) {
                    auto [req, mask] = wire::decode_vespo_update_req(eng_, payload, s->pk);
                    auto resp = vespo::server_update(*s, req, mask, eng_);
                    save();
                    return wire::pack_frame(wire::MsgType::kUpdateResp,
                                            wire::encode_vespo_update_resp(eng_, resp));
                }
                break;
            }
            case wire::MsgType::kUpdateFetch: {
                if (auto* s = std::get_if<dpor::ServerState<E>>(&st_)) {
                    auto fetch = wire::decode_update_fetch(payload);
                    auto reveal = dpor::server_update_fetch(*s, fetch);
                    return wire::pack_frame(wire::MsgType::kUpdateReveal,
                                            wire::encode_update_reveal(eng_, reveal));
                }
                break;
            }
            case wire::MsgType::kUpdateApply: {
                if (auto* s = std::get_if<dpor::ServerState<E>>(&st_)) {
                    auto apply = wire::decode_update_apply(eng_, payload, s->pk);
                    dpor::server_update_apply(*s, apply, eng_);
                    save();
                    return wire::pack_frame(wire::MsgType::kOk, {});
                }
                break;
            }
            default:
                break;
        }
        return wire::error_frame("UNSUPPORTED", "message not valid for this protocol");
    }

    const E& eng_;
    StateDir sd_;
    SymmetricEngine<E> sym_;
    state::ContainerInfo info_;
    std::variant<ckzg::ServerState<E>, pubdyn::ServerState<E>, vespo::ServerState<E>,
                 dpor::ServerState<E>>
        st_;
};

// -- transports ---------------------------------------------------------------

class Transport {
public:
    virtual ~Transport() = default;
    virtual Bytes round(BytesView frame) = 0;
};

/// Default transport: every request/response materializes as a frame file
/// under <state-dir>/msg/, answered by an in-process server host.
template <typename E>
class FileTransport : public Transport {
public:
    FileTransport(const E& eng, const StateDir& sd, unsigned workers)
        : sd_(sd), host_(eng, sd), workers_(workers) {
        fs::create_directories(sd_.msg_dir());
    }

    Bytes round(BytesView frame) override {
        auto req = sd_.msg_dir() / ("req-" + std::to_string(seq_) + ".bin");
        auto resp = sd_.msg_dir() / ("resp-" + std::to_string(seq_) + ".bin");
        ++seq_;
        state::write_file(req.string(), frame);
        Bytes out = host_.handle(state::read_file(req.string()), workers_);
        state::write_file(resp.string(), out);
        return state::read_file(resp.string());
    }

private:
    StateDir sd_;
    ServerHost<E> host_;
    unsigned workers_;
    uint64_t seq_ = 0;
};

class TcpTransport : public Transport {
public:
    TcpTransport(const std::string& host, uint16_t port) {
        fd_ = socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw std::runtime_error("socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw std::runtime_error("bad address: " + host);
        if (connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port));
    }

    ~TcpTransport() override {
        if (fd_ >= 0) close(fd_);
    }

    Bytes round(BytesView frame) override {
        send_all(frame);
        return recv_frame();
    }

private:
    void send_all(BytesView data) {
        size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, 0);
            if (n <= 0) throw std::runtime_error("send failed");
            sent += size_t(n);
        }
    }

    Bytes recv_exact(size_t n) {
        Bytes out(n);
        size_t got = 0;
        while (got < n) {
            ssize_t k = ::recv(fd_, out.data() + got, n - got, 0);
            if (k <= 0) throw std::runtime_error("connection closed");
            got += size_t(k);
        }
        return out;
    }

    Bytes recv_frame() {
        Bytes head = recv_exact(4);
        uint32_t len = uint32_t(head[0]) << 24 | uint32_t(head[1]) << 16 |
                       uint32_t(head[2]) << 8 | head[3];
        if (len == 0 || len > (1u << 30)) throw std::runtime_error("bad frame length");
        Bytes body = recv_exact(len);
        Bytes frame = head;
        append_bytes(frame, body);
        return frame;
    }

    int fd_ = -1;
};

Bytes expect_frame(Transport& t, BytesView request, wire::MsgType want) {
    Bytes raw = t.round(request);
    auto [type, payload] = wire::unpack_frame(raw);
    if (type == wire::MsgType::kError) {
        ByteReader r(payload);
        std::string code = state::read_string(r);
        std::string msg = state::read_string(r);
        throw std::runtime_error("server error " + code + ": " + msg);
    }
    if (type != want) throw std::runtime_error("unexpected response type");
    return payload;
}

std::unique_ptr<Transport> make_transport(const std::string& connect, const std::string& curve,
                                          const StateDir& sd, unsigned workers) {
    if (!connect.empty()) {
        auto colon = connect.rfind(':');
        if (colon == std::string::npos) throw std::invalid_argument("--connect needs host:port");
        return std::make_unique<TcpTransport>(connect.substr(0, colon),
                                              uint16_t(std::stoi(connect.substr(colon + 1))));
    }
    return with_engine(curve, [&](auto& eng) -> std::unique_ptr<Transport> {
        using E = std::decay_t<decltype(eng)>;
        return std::make_unique<FileTransport<E>>(eng, sd, workers);
    });
}

// -- common option bundle -------------------------------------------------------

struct CommonOpts {
    std::string state_dir;
    std::string curve = "bn254";
    std::string connect;
    unsigned workers = 0;
    uint64_t seed = 0;

    unsigned effective_workers() const {
        if (workers) return workers;
        unsigned hw = std::thread::hardware_concurrency();
        return hw ? hw : 1;
    }

    RandomSource rng() const { return seed ? RandomSource(seed) : RandomSource(); }
};

dpor::ShapePolicy shape_from_string(const std::string& s) {
    if (s == "square") return {dpor::ShapeKind::kSquare};
    if (s == "rect") return {dpor::ShapeKind::kRect};
    auto comma = s.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("--shape must be square, rect or m,n");
    dpor::ShapePolicy p{dpor::ShapeKind::kExplicit};
    p.rows = std::stoull(s.substr(0, comma));
    p.cols = std::stoull(s.substr(comma + 1));
    return p;
}

// -- setup --------------------------------------------------------------------

Polynomial load_or_random_polynomial(const std::string& input, uint64_t degree,
                                     const PrimeField& f, RandomSource& rng) {
    if (!input.empty()) {
        Bytes data = state::read_file(input);
        size_t w = f.byte_width();
        if (data.empty() || data.size() % w != 0)
            throw std::runtime_error("input polynomial file must hold fixed-width scalars");
        std::vector<Scalar> coeffs;
        for (size_t off = 0; off < data.size(); off += w)
            coeffs.push_back(f.from_bytes(BytesView(data.data() + off, w)));
        return Polynomial(std::move(coeffs), &f);
    }
    if (degree == 0) throw std::invalid_argument("setup needs --degree or --input");
    return Polynomial::random(degree, f, rng);
}

int cmd_setup(const CommonOpts& common, const std::string& protocol, const std::string& input,
              uint64_t degree, unsigned lhe_bits, const std::string& shape) {
    auto proto = state::protocol_from_name(protocol);
    StateDir sd{fs::path(common.state_dir)};
    return with_engine(common.curve, [&](auto& eng) {
        using E = std::decay_t<decltype(eng)>;
        const PrimeField& f = eng.field();
        RandomSource rng = common.rng();
        unsigned workers = common.effective_workers();
        fs::create_directories(sd.dir);
        std::string lhe_tag = lhe::kSchemeTag;

        switch (proto) {
            case state::Protocol::kCkzg: {
                Polynomial P = load_or_random_polynomial(input, degree, f, rng);
                auto [client, server] = ckzg::setup(eng, P, lhe_bits, rng, workers);
                state::ContainerInfo ci{proto, state::Role::kClient, common.curve, lhe_tag};
                state::write_file(sd.client().string(),
                                  state::pack_container(ci, state::encode(eng, client)));
                ci.role = state::Role::kServer;
                state::write_file(sd.server().string(),
                                  state::pack_container(ci, state::encode(eng, server)));
                break;
            }
            case state::Protocol::kPubdyn: {
                SymmetricEngine<E> sym(eng);
                Polynomial P = load_or_random_polynomial(input, degree, f, rng);
                auto [client, verifier, server] = pubdyn::setup(sym, P, rng);
                state::ContainerInfo ci{proto, state::Role::kClient, common.curve, "none"};
                state::write_file(sd.client().string(),
                                  state::pack_container(ci, state::encode(sym, client)));
                ci.role = state::Role::kVerifier;
                state::write_file(sd.bulletin().string(),
                                  state::pack_container(ci, state::encode(sym, verifier)));
                ci.role = state::Role::kServer;
                state::write_file(sd.server().string(),
                                  state::pack_container(ci, state::encode(sym, server)));
                break;
            }
            case state::Protocol::kVespo: {
                Polynomial P = load_or_random_polynomial(input, degree, f, rng);
                auto [client, server] = vespo::setup(eng, P, lhe_bits, rng, workers);
                state::ContainerInfo ci{proto, state::Role::kClient, common.curve, lhe_tag};
                state::write_file(sd.client().string(),
                                  state::pack_container(ci, state::encode(eng, client)));
                ci.role = state::Role::kServer;
                state::write_file(sd.server().string(),
                                  state::pack_container(ci, state::encode(eng, server)));
                break;
            }
            case state::Protocol::kDpor: {
                if (input.empty()) throw std::invalid_argument("dpor setup needs --input FILE");
                Bytes raw = state::read_file(input);
                auto [client, server] =
                    dpor::init(eng, std::move(raw), shape_from_string(shape), lhe_bits, rng,
                               workers);
                state::ContainerInfo ci{proto, state::Role::kClient, common.curve, lhe_tag};
                state::write_file(sd.client().string(),
                                  state::pack_container(ci, state::encode(eng, client)));
                ci.role = state::Role::kServer;
                state::write_file(sd.server().string(),
                                  state::pack_container(ci, state::encode(eng, server)));
                state::write_file(sd.database().string(), state::encode_database(server.data));
                std::cout << "shape: " << server.data.rows() << "x" << server.data.cols()
                          << " chunk " << server.data.chunk() << "B\n";
                break;
            }
        }
        std::cout << "setup complete: " << sd.dir.string() << "\n";
        return kExitOk;
    });
}

// -- eval ---------------------------------------------------------------------

int cmd_eval(const CommonOpts& common, const std::string& point_dec) {
    StateDir sd{fs::path(common.state_dir)};
    // Role states identify the protocol; pubdyn verifies from the bulletin.
    bool pubdyn_mode = fs::exists(sd.bulletin());
    auto info = pubdyn_mode ? load_info(sd.bulletin()) : load_info(sd.client());

    return with_engine(info.curve_id, [&](auto& eng) {
        using E = std::decay_t<decltype(eng)>;
        const PrimeField& f = eng.field();
        RandomSource rng = common.rng();
        auto transport = make_transport(common.connect, info.curve_id, sd,
                                        common.effective_workers());

        Scalar r = point_dec.empty() ? f.random(rng) : f.make(mpz_class(point_dec));

        if (info.protocol == state::Protocol::kCkzg) {
            auto [ci, payload] = load_state(sd.client(), state::Role::kClient);
            auto client = state::decode_ckzg_client(eng, payload);
            Bytes resp = expect_frame(*transport,
                                      wire::pack_frame(wire::MsgType::kEvalReq,
                                                       wire::encode_eval_req(r)),
                                      wire::MsgType::kEvalResp);
            auto ev = wire::decode_ckzg_eval_resp(eng, resp, client.pk);
            auto z = ckzg::verify(eng, client, r, ev);
            if (!z) throw RejectError("PAIRING_FAIL");
            std::cout << z->value().get_str() << "\n";
            return kExitOk;
        }
        if (info.protocol == state::Protocol::kPubdyn) {
            SymmetricEngine<E> sym(eng);
            auto [vi, vpayload] = load_state(sd.bulletin(), state::Role::kVerifier);
            auto verifier = state::decode_pubdyn_verifier(sym, vpayload);
            Bytes resp = expect_frame(*transport,
                                      wire::pack_frame(wire::MsgType::kEvalReq,
                                                       wire::encode_eval_req(r)),
                                      wire::MsgType::kEvalResp);
            auto ev = wire::decode_pubdyn_eval_resp(sym, resp);
            auto z = pubdyn::verify(sym, verifier, r, ev);
            if (!z) throw RejectError("PAIRING_FAIL");
            std::cout << z->value().get_str() << "\n";
            return kExitOk;
        }
        if (info.protocol == state::Protocol::kVespo) {
            auto [ci, payload] = load_state(sd.client(), state::Role::kClient);
            auto client = state::decode_vespo_client(eng, payload);
            auto ch = point_dec.empty()
                          ? vespo::client_challenge(client, rng)
                          : vespo::Challenge{r, pmgs(client.degree,
                                                     client.mask_matrix.scaled(r),
                                                     client.mask_shift)};
            Bytes resp = expect_frame(*transport,
                                      wire::pack_frame(wire::MsgType::kEvalReq,
                                                       wire::encode_eval_req(ch.point)),
                                      wire::MsgType::kEvalResp);
            auto ev = wire::decode_vespo_eval_resp(eng, resp, client.pk);
            auto z = vespo::client_verify(eng, client, ch, ev);
            if (!z) throw RejectError("PAIRING_FAIL");
            std::cout << z->value().get_str() << "\n";
            return kExitOk;
        }
        throw std::runtime_error("eval is not defined for this protocol (use audit)");
    });
}

// -- update -------------------------------------------------------------------

int cmd_update(const CommonOpts& common, int64_t index, const std::string& delta_dec,
               int64_t row, int64_t col, const std::string& value_dec) {
    StateDir sd{fs::path(common.state_dir)};
    auto info = load_info(sd.client());
    return with_engine(info.curve_id, [&](auto& eng) {
        using E = std::decay_t<decltype(eng)>;
        const PrimeField& f = eng.field();
        RandomSource rng = common.rng();
        auto transport = make_transport(common.connect, info.curve_id, sd,
                                        common.effective_workers());
        auto [ci, payload] = load_state(sd.client(), state::Role::kClient);

        if (info.protocol == state::Protocol::kPubdyn) {
            if (index < 0 || delta_dec.empty())
                throw std::invalid_argument("pubdyn update needs --index and --delta");
            SymmetricEngine<E> sym(eng);
            auto client = state::decode_pubdyn_client(sym, payload);
            if (uint64_t(index) > client.degree)
                throw std::invalid_argument("index exceeds the degree bound");
            auto [vi, vpayload] = load_state(sd.bulletin(), state::Role::kVerifier);
            auto verifier = state::decode_pubdyn_verifier(sym, vpayload);
            Scalar delta = f.make(mpz_class(delta_dec));
            Bytes respb = expect_frame(
                *transport,
                wire::pack_frame(wire::MsgType::kUpdateReq,
                                 wire::encode_pubdyn_update_req(uint64_t(index), delta)),
                wire::MsgType::kUpdateResp);
            auto resp = wire::decode_pubdyn_update_resp(sym, respb);
            if (!pubdyn::client_update(sym, client, verifier, uint64_t(index), delta, resp))
                throw RejectError("MERKLE_FAIL");
            state::write_file(sd.client().string(),
                              state::pack_container(ci, state::encode(sym, client)));
            state::write_file(sd.bulletin().string(),
                              state::pack_container(vi, state::encode(sym, verifier)));
            std::cout << "OK\n";
            return kExitOk;
        }
        if (info.protocol == state::Protocol::kVespo) {
            if (index < 0 || delta_dec.empty())
                throw std::invalid_argument("vespo update needs --index and --delta");
            auto client = state::decode_vespo_client(eng, payload);
            Scalar delta = f.make(mpz_class(delta_dec));
            auto [req, mask] =
                vespo::client_update_request(eng, client, uint64_t(index), delta, rng);
            Bytes respb = expect_frame(
                *transport,
                wire::pack_frame(wire::MsgType::kUpdateReq,
                                 wire::encode_vespo_update_req(eng, req, mask)),
                wire::MsgType::kUpdateResp);
            auto resp = wire::decode_vespo_update_resp(eng, respb, client.pk);
            if (!vespo::client_update_finish(eng, client, uint64_t(index), req, mask, resp))
                throw RejectError("MERKLE_FAIL");
            state::write_file(sd.client().string(),
                              state::pack_container(ci, state::encode(eng, client)));
            std::cout << "OK\n";
            return kExitOk;
        }
        if (info.protocol == state::Protocol::kDpor) {
            if (row < 0 || col < 0 || value_dec.empty())
                throw std::invalid_argument("dpor update needs --row, --col and --value");
            auto client = state::decode_dpor_client(eng, payload);
            if (uint64_t(row) >= client.rows || uint64_t(col) >= client.cols)
                throw std::invalid_argument("matrix index out of range");
            dpor::UpdateFetch where{uint64_t(row), uint64_t(col)};
            Bytes revealb = expect_frame(
                *transport,
                wire::pack_frame(wire::MsgType::kUpdateFetch, wire::encode_update_fetch(where)),
                wire::MsgType::kUpdateReveal);
            auto reveal = wire::decode_update_reveal(eng, revealb, client.pk);
            Scalar value = f.make(mpz_class(value_dec));
            auto outcome = dpor::client_update(eng, client, where, value, reveal, rng);
            if (!outcome.accepted) throw RejectError("MERKLE_FAIL");
            if (outcome.apply) {
                (void)expect_frame(*transport,
                                   wire::pack_frame(wire::MsgType::kUpdateApply,
                                                    wire::encode_update_apply(eng, *outcome.apply)),
                                   wire::MsgType::kOk);
            }
            state::write_file(sd.client().string(),
                              state::pack_container(ci, state::encode(eng, client)));
            std::cout << "OK\n";
            return kExitOk;
        }
        throw std::runtime_error("the ciphered static protocol has no update (re-run setup)");
    });
}

// -- audit --------------------------------------------------------------------

int cmd_audit(const CommonOpts& common) {
    StateDir sd{fs::path(common.state_dir)};
    auto info = load_info(sd.client());
    if (info.protocol != state::Protocol::kDpor)
        throw std::runtime_error("audit applies to dpor state directories");
    return with_engine(info.curve_id, [&](auto& eng) {
        RandomSource rng = common.rng();
        auto transport = make_transport(common.connect, info.curve_id, sd,
                                        common.effective_workers());
        auto [ci, payload] = load_state(sd.client(), state::Role::kClient);
        auto client = state::decode_dpor_client(eng, payload);
        auto ch = dpor::client_audit_challenge(client, rng);
        Bytes respb = expect_frame(*transport,
                                   wire::pack_frame(wire::MsgType::kAuditReq,
                                                    wire::encode_eval_req(ch.point)),
                                   wire::MsgType::kAuditResp);
        auto resp = wire::decode_audit_resp(eng, respb, client.pk);
        auto reject = dpor::client_audit_verify(eng, client, ch, resp);
        if (reject) {
            append_audit_log(sd, ch.point, "reject");
            throw RejectError(*reject == dpor::AuditReject::kPairing ? "PAIRING_FAIL"
                                                                     : "DOT_FAIL");
        }
        append_audit_log(sd, ch.point, "accept");
        std::cout << "OK\n";
        return kExitOk;
    });
}

// -- serve --------------------------------------------------------------------

int cmd_serve(const CommonOpts& common, uint16_t port) {
    StateDir sd{fs::path(common.state_dir)};
    auto info = load_info(sd.server());
    return with_engine(info.curve_id, [&](auto& eng) -> int {
        using E = std::decay_t<decltype(eng)>;
        ServerHost<E> host(eng, sd);
        int lfd = socket(AF_INET, SOCK_STREAM, 0);
        if (lfd < 0) throw std::runtime_error("socket() failed");
        int one = 1;
        setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(port);
        if (bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw std::runtime_error("cannot bind port " + std::to_string(port));
        if (listen(lfd, 4) != 0) throw std::runtime_error("listen failed");
        std::cout << "listening on 127.0.0.1:" << port << "\n" << std::flush;

        for (;;) {
            int cfd = accept(lfd, nullptr, nullptr);
            if (cfd < 0) continue;
            try {
                for (;;) {
                    uint8_t head[4];
                    size_t got = 0;
                    while (got < 4) {
                        ssize_t k = ::recv(cfd, head + got, 4 - got, 0);
                        if (k <= 0) goto next_client;
                        got += size_t(k);
                    }
                    uint32_t len = uint32_t(head[0]) << 24 | uint32_t(head[1]) << 16 |
                                   uint32_t(head[2]) << 8 | head[3];
                    if (len == 0 || len > (1u << 30)) goto next_client;
                    Bytes frame(head, head + 4);
                    frame.resize(4 + len);
                    got = 0;
                    while (got < len) {
                        ssize_t k = ::recv(cfd, frame.data() + 4 + got, len - got, 0);
                        if (k <= 0) goto next_client;
                        got += size_t(k);
                    }
                    Bytes resp = host.handle(frame, common.effective_workers());
                    size_t sent = 0;
                    while (sent < resp.size()) {
                        ssize_t k = ::send(cfd, resp.data() + sent, resp.size() - sent, 0);
                        if (k <= 0) goto next_client;
                        sent += size_t(k);
                    }
                }
            } catch (const std::exception& e) {
                std::cerr << "session error: " << e.what() << "\n";
            }
        next_client:
            close(cfd);
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verifiable polynomial evaluation toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string protocol = "vespo";
    std::string input;
    uint64_t degree = 0;
    unsigned lhe_bits = 2048;
    std::string shape = "square";
    std::string point;
    int64_t index = -1, row = -1, col = -1;
    std::string delta, value;
    uint16_t port = 0;
    bench::Options bopts;
    std::string bench_out;

    auto add_common = [&](CLI::App* cmd, bool with_connect = true) {
        cmd->add_option("--state-dir", common.state_dir, "state directory")->required();
        cmd->add_option("--curve", common.curve, "curve id (bn254, mock, mock-<prime>)");
        cmd->add_option("--workers", common.workers, "worker threads (0 = hardware)");
        cmd->add_option("--seed", common.seed, "deterministic RNG seed (testing)");
        if (with_connect)
            cmd->add_option("--connect", common.connect, "remote server host:port");
    };

    auto* setup = app.add_subcommand("setup", "create client/verifier/server states");
    add_common(setup, false);
    setup->add_option("--protocol", protocol, "ckzg | pubdyn | vespo | dpor");
    setup->add_option("--input", input, "input file (database, or packed scalars)");
    setup->add_option("--degree", degree, "random polynomial degree");
    setup->add_option("--lhe-bits", lhe_bits, "Paillier modulus bits");
    setup->add_option("--shape", shape, "dpor matrix shape: square | rect | m,n");

    auto* eval = app.add_subcommand("eval", "run one verified evaluation");
    add_common(eval);
    eval->add_option("--point", point, "evaluation point (decimal; default random)");

    auto* update = app.add_subcommand("update", "apply a verified update");
    add_common(update);
    update->add_option("--index", index, "coefficient index (vpe protocols)");
    update->add_option("--delta", delta, "coefficient delta (decimal)");
    update->add_option("--row", row, "matrix row (dpor)");
    update->add_option("--col", col, "matrix column (dpor)");
    update->add_option("--value", value, "new entry value (dpor, decimal)");

    auto* audit = app.add_subcommand("audit", "run one retrievability audit");
    add_common(audit);

    auto* serve = app.add_subcommand("serve", "host the server role over TCP");
    add_common(serve, false);
    serve->add_option("--listen", port, "TCP port")->required();

    auto* benchcmd = app.add_subcommand("bench", "benchmark harness");
    benchcmd->add_option("--protocol", bopts.protocol, "ckzg | pubdyn | vespo | dpor");
    benchcmd->add_option("--degrees", bopts.degrees, "degree sweep (vpe protocols)")
        ->delimiter(',');
    benchcmd->add_option("--sizes", bopts.sizes_mib, "database MiB sweep (dpor)")
        ->delimiter(',');
    benchcmd->add_option("--workers", bopts.workers, "worker-count sweep")->delimiter(',');
    benchcmd->add_option("--reps", bopts.reps, "repetitions per point (median)");
    benchcmd->add_option("--lhe-bits", bopts.lhe_bits, "Paillier modulus bits");
    benchcmd->add_option("--curve", bopts.curve, "curve id");
    benchcmd->add_option("--seed", bopts.seed, "deterministic RNG seed");
    benchcmd->add_option("--output", bench_out, "TSV output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*setup) return cmd_setup(common, protocol, input, degree, lhe_bits, shape);
        if (*eval) return cmd_eval(common, point);
        if (*update) return cmd_update(common, index, delta, row, col, value);
        if (*audit) return cmd_audit(common);
        if (*serve) return cmd_serve(common, port);
        if (*benchcmd) {
            auto run = [&](auto& eng) { return bench::run(eng, bopts); };
            bench::Report report = with_engine(bopts.curve, run);
            if (bench_out.empty()) {
                std::cout << report.tsv;
                std::cerr << report.summary;
            } else {
                state::write_file(bench_out, Bytes(report.tsv.begin(), report.tsv.end()));
                std::cout << report.summary;
            }
            return kExitOk;
        }
    } catch (const RejectError& e) {
        std::cerr << "REJECT " << e.what() << "\n";
        return kExitReject;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
