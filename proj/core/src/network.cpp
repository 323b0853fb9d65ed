#include "psim/network.hpp"

#include <cmath>
#include <stdexcept>

namespace psim {

BusIndex BusIndex::build(const std::vector<Bus>& buses) {
    BusIndex idx;
    idx.ids.reserve(buses.size());
    for (const auto& b : buses) {
        if (idx.pos.count(b.id))
            throw std::invalid_argument("duplicate bus id " + std::to_string(b.id));
        idx.pos[b.id] = static_cast<int>(idx.ids.size());
        idx.ids.push_back(b.id);
    }
    return idx;
}

int BusIndex::at(int bus_id) const {
    auto it = pos.find(bus_id);
    if (it == pos.end())
        throw std::invalid_argument("dangling bus reference " + std::to_string(bus_id));
    return it->second;
}

void stamp_branch(CMat& Y, const Branch& br, const BusIndex& index, double sign) {
    if (br.x == 0.0) throw std::invalid_argument("branch " + br.id + " has zero reactance");
    const int f = index.at(br.from);
    const int t = index.at(br.to);
    const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
    const std::complex<double> ysh(0.0, br.b / 2.0);
    const double n = br.tap;
    Y(f, f) += sign * (ys + ysh) / (n * n);
    Y(f, t) -= sign * ys / n;
    Y(t, f) -= sign * ys / n;
    Y(t, t) += sign * (ys + ysh);
}

AdmittanceMatrix build_admittance(const std::vector<Bus>& buses,
                                  const std::vector<Branch>& branches,
                                  const BusIndex& index) {
    const int n = index.size();
    AdmittanceMatrix A{CMat::Zero(n, n)};
    for (const auto& br : branches) {
        if (!br.in_service) continue;
        stamp_branch(A.Y, br, index);
    }
    for (const auto& b : buses) {
        A.Y(index.at(b.id), index.at(b.id)) += std::complex<double>(b.gs, b.bs);
    }
    return A;
}

OutageResult apply_branch_outage(const AdmittanceMatrix& Y, const Branch& branch,
                                 const BusIndex& index) {
    OutageResult res{Y, true};
    if (!branch.in_service) {
        res.applied = false;
        return res;
    }
    stamp_branch(res.matrix.Y, branch, index, -1.0);
    return res;
}

void bus_power_flows(const CMat& Y, const Vec& V, const Vec& theta, Vec& P, Vec& Q) {
    const int n = static_cast<int>(V.size());
    P.setZero(n);
    Q.setZero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double g = Y(i, j).real();
            const double b = Y(i, j).imag();
            if (g == 0.0 && b == 0.0) continue;
            const double th = theta(i) - theta(j);
            const double c = std::cos(th), s = std::sin(th);
            P(i) += V(i) * V(j) * (g * c + b * s);
            Q(i) += V(i) * V(j) * (g * s - b * c);
        }
    }
}

void flow_jacobian(const CMat& Y, const Vec& V, const Vec& theta,
                   Mat& dP_dV, Mat& dP_dth, Mat& dQ_dV, Mat& dQ_dth) {
    const int n = static_cast<int>(V.size());
    dP_dV.setZero(n, n);
    dP_dth.setZero(n, n);
    dQ_dV.setZero(n, n);
    dQ_dth.setZero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double g = Y(i, j).real();
            const double b = Y(i, j).imag();
            if (g == 0.0 && b == 0.0) continue;
            if (j == i) {
                dP_dV(i, i) += 2.0 * V(i) * g;
                dQ_dV(i, i) += -2.0 * V(i) * b;
                continue;
            }
            const double th = theta(i) - theta(j);
            const double c = std::cos(th), s = std::sin(th);
            const double pc = g * c + b * s;  // P kernel
            const double qc = g * s - b * c;  // Q kernel
            dP_dV(i, i) += V(j) * pc;
            dP_dV(i, j) += V(i) * pc;
            dP_dth(i, i) += V(i) * V(j) * (-g * s + b * c);
            dP_dth(i, j) += V(i) * V(j) * (g * s - b * c);
            dQ_dV(i, i) += V(j) * qc;
            dQ_dV(i, j) += V(i) * qc;
            dQ_dth(i, i) += V(i) * V(j) * (g * c + b * s);
            dQ_dth(i, j) += -V(i) * V(j) * (g * c + b * s);
        }
    }
}

double total_network_loss(const CMat& Y, const Vec& V, const Vec& theta) {
    Vec P, Q;
    bus_power_flows(Y, V, theta, P, Q);
    return P.sum();
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::short_term_unstable: return "short-term-unstable";
        case Termination::newton_failure: return "newton-failure";
        case Termination::singularity: return "singularity";
    }
    return "unknown";
}

}  // namespace psim
