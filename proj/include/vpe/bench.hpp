#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>

#include "vpe/dpor.hpp"
#include "vpe/vespo_protocol.hpp"
#include "vpe/vpe_ciphered.hpp"
#include "vpe/vpe_public_dynamic.hpp"

namespace vpe::bench {

// Benchmark harness: per-phase wall times (server value, server
// certificate, client challenge, client verify, client decrypt), reported
// as the median over a configurable number of repetitions. Output is a
// tab-separated table with a header row plus a short text summary.

struct Options {
    std::string protocol = "vespo";
    std::vector<uint64_t> degrees = {256, 512, 1024};
    std::vector<uint64_t> sizes_mib = {1};
    std::vector<unsigned> workers = {1};
    unsigned reps = 11;
    unsigned lhe_bits = 2048;
    std::string curve = "bn254";
    uint64_t seed = 0;
};

struct Row {
    std::string protocol;
    uint64_t size = 0;  // degree, or database bytes for dpor
    unsigned workers = 1;
    std::string phase;
    double median_ms = 0;
    unsigned reps = 0;
};

struct Report {
    std::vector<Row> rows;
    std::string tsv;
    std::string summary;
};

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : v[v.size() / 2];
}

template <typename Fn>
double time_ms(Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

namespace detail {

struct PhaseTimer {
    std::map<std::string, std::vector<double>> samples;

    template <typename Fn>
    void run(const std::string& phase, Fn&& fn) {
        samples[phase].push_back(time_ms(fn));
    }
};

inline void emit(std::vector<Row>& rows, const std::string& protocol, uint64_t size,
                 unsigned workers, unsigned reps, const PhaseTimer& t,
                 const std::vector<std::string>& order) {
    for (const auto& phase : order) {
        auto it = t.samples.find(phase);
        if (it == t.samples.end()) continue;
        rows.push_back({protocol, size, workers, phase, median_of(it->second), reps});
    }
}

}  // namespace detail

template <typename E>
Report run(const E& eng, const Options& opt) {
    Report report;
    const PrimeField& f = eng.field();
    RandomSource rng = opt.seed ? RandomSource(opt.seed) : RandomSource();
    const std::vector<std::string> order = {"server_value", "server_certificate",
                                            "client_challenge", "client_verify",
                                            "client_decrypt"};

    if (opt.protocol == "vespo" || opt.protocol == "ckzg") {
        for (uint64_t d : opt.degrees) {
            Polynomial P = Polynomial::random(d, f, rng);
            if (opt.protocol == "vespo") {
                auto [client, server] = vespo::setup(eng, P, opt.lhe_bits, rng,
                                                     std::max(1u, opt.workers.back()));
                for (unsigned q : opt.workers) {
                    detail::PhaseTimer timer;
                    for (unsigned rep = 0; rep < opt.reps; ++rep) {
                        vespo::Challenge ch;
                        timer.run("client_challenge",
                                  [&] { ch = vespo::client_challenge(client, rng); });
                        lhe::Ciphertext zeta;
                        timer.run("server_value", [&] {
                            zeta = lhe::ho_dotproduct(server.cipher_coeffs, ch.point, q);
                        });
                        std::array<typename E::GTElem, 2> xi;
                        timer.run("server_certificate", [&] {
                            auto u = prefix_chain(eng.g2, ch.point, server.secret_powers, q);
                            xi = masked_pair_xi(eng, server.masked_coeffs, u, q);
                        });
                        Scalar z = f.zero();
                        timer.run("client_decrypt", [&] {
                            z = Scalar(client.sk.decrypt(zeta) % f.modulus(), &f);
                        });
                        timer.run("client_verify", [&] {
                            vespo::Evaluation<E> ev{zeta, xi};
                            if (!vespo::client_verify(eng, client, ch, ev))
                                throw std::runtime_error("bench: verification failed");
                        });
                        (void)z;
                    }
                    detail::emit(report.rows, opt.protocol, d, q, opt.reps, timer, order);
                }
            } else {
                auto [client, server] = ckzg::setup(eng, P, opt.lhe_bits, rng,
                                                    std::max(1u, opt.workers.back()));
                for (unsigned q : opt.workers) {
                    detail::PhaseTimer timer;
                    for (unsigned rep = 0; rep < opt.reps; ++rep) {
                        Scalar r = f.random(rng);
                        lhe::Ciphertext zeta;
                        timer.run("server_value", [&] {
                            zeta = lhe::ho_dotproduct(server.cipher_coeffs, r, q);
                        });
                        typename E::G1Elem xi;
                        timer.run("server_certificate", [&] {
                            auto x = scalar_powers(r, server.tail_exponents.size() - 1, q);
                            xi = dot_in_exponent(eng.g1, server.tail_exponents, x);
                        });
                        timer.run("client_verify", [&] {
                            ckzg::Evaluation<E> ev{zeta, xi};
                            if (!ckzg::verify(eng, client, r, ev))
                                throw std::runtime_error("bench: verification failed");
                        });
                    }
                    detail::emit(report.rows, opt.protocol, d, q, opt.reps, timer, order);
                }
            }
        }
    } else if (opt.protocol == "pubdyn") {
        SymmetricEngine<E> sym(eng);
        for (uint64_t d : opt.degrees) {
            Polynomial P = Polynomial::random(d, f, rng);
            auto [client, verifier, server] = pubdyn::setup(sym, P, rng);
            for (unsigned q : opt.workers) {
                detail::PhaseTimer timer;
                for (unsigned rep = 0; rep < opt.reps; ++rep) {
                    Scalar r = f.random(rng);
                    pubdyn::Evaluation<E> ev{f.zero(), sym.g.identity()};
                    timer.run("server_value", [&] {
                        ev.value = horner_eval(Polynomial(server.coeffs, &f), r);
                    });
                    timer.run("server_certificate", [&] {
                        std::vector<Scalar> tail(server.coeffs.begin() + 1, server.coeffs.end());
                        ev.certificate = prefix_xi(sym.g, r, server.secret_powers, tail, q);
                    });
                    timer.run("client_verify", [&] {
                        if (!pubdyn::verify(sym, verifier, r, ev))
                            throw std::runtime_error("bench: verification failed");
                    });
                }
                detail::emit(report.rows, opt.protocol, d, q, opt.reps, timer, order);
            }
        }
    } else if (opt.protocol == "dpor") {
        for (uint64_t mib : opt.sizes_mib) {
            Bytes raw(mib << 20);
            for (auto& b : raw) b = uint8_t(rng.below(256).get_ui());
            auto [client, server] = dpor::init(eng, std::move(raw), {dpor::ShapeKind::kSquare},
                                               opt.lhe_bits, rng,
                                               std::max(1u, opt.workers.back()));
            for (unsigned q : opt.workers) {
                detail::PhaseTimer timer;
                for (unsigned rep = 0; rep < opt.reps; ++rep) {
                    dpor::Challenge ch;
                    timer.run("client_challenge",
                              [&] { ch = dpor::client_audit_challenge(client, rng); });
                    dpor::AuditResponse<E> resp;
                    timer.run("server_value", [&] {
                        auto x = scalar_powers(ch.point, server.data.cols() - 1, q);
                        resp.row_image = server.data.mat_vec(x, q);
                        resp.value_cipher = lhe::ho_dotproduct(server.cipher_control, ch.point, q);
                    });
                    timer.run("server_certificate", [&] {
                        std::vector<typename E::G2Elem> S_head(server.secret_powers.begin(),
                                                               server.secret_powers.end() - 1);
                        auto u = prefix_chain(eng.g2, ch.point, S_head, q);
                        std::vector<std::array<typename E::G1Elem, 2>> H_tail(
                            server.masked_control.begin() + 1, server.masked_control.end());
                        resp.certificate = masked_pair_xi(eng, H_tail, u, q);
                    });
                    timer.run("client_verify", [&] {
                        if (dpor::client_audit_verify(eng, client, ch, resp))
                            throw std::runtime_error("bench: audit failed");
                    });
                }
                detail::emit(report.rows, opt.protocol, mib << 20, q, opt.reps, timer, order);
            }
        }
    } else {
        throw std::invalid_argument("unknown bench protocol: " + opt.protocol);
    }

    std::ostringstream tsv;
    tsv << "protocol\tsize\tworkers\tphase\tmedian_ms\treps\n";
    for (const auto& row : report.rows)
        tsv << row.protocol << '\t' << row.size << '\t' << row.workers << '\t' << row.phase
            << '\t' << row.median_ms << '\t' << row.reps << '\n';
    report.tsv = tsv.str();

    std::ostringstream sum;
    sum << "bench: " << opt.protocol << ", " << opt.reps << " reps/point, median values\n";
    for (const auto& row : report.rows)
        if (row.phase == "server_value" || row.phase == "client_verify")
            sum << "  size " << row.size << " q=" << row.workers << " " << row.phase << ": "
                << row.median_ms << " ms\n";
    report.summary = sum.str();
    return report;
}

}  // namespace vpe::bench
