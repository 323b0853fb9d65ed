#pragma once

#include <complex>
#include <unordered_map>
#include <vector>

#include "psim/case.hpp"
#include "psim/types.hpp"

namespace psim {

/// Bus id -> contiguous index mapping, deterministic in case order.
struct BusIndex {
    std::vector<int> ids;
    std::unordered_map<int, int> pos;

    static BusIndex build(const std::vector<Bus>& buses);
    int at(int bus_id) const;
    int size() const { return static_cast<int>(ids.size()); }
};

/// Dense complex bus admittance matrix. The network is small at desk
/// scale, so the matrix is stored dense and stamped in branch order.
struct AdmittanceMatrix {
    CMat Y;
};

struct OutageResult {
    AdmittanceMatrix matrix;
    bool applied = true;  // false when the branch was already out of service
};

/// Pi-model stamp of a single branch; tap sits on the from side.
void stamp_branch(CMat& Y, const Branch& br, const BusIndex& index, double sign = 1.0);

AdmittanceMatrix build_admittance(const std::vector<Bus>& buses,
                                  const std::vector<Branch>& branches,
                                  const BusIndex& index);

/// Removes one in-service branch by unstamping it. No-op (applied=false)
/// when the branch is already out.
OutageResult apply_branch_outage(const AdmittanceMatrix& Y, const Branch& branch,
                                 const BusIndex& index);

/// Network active/reactive power flowing out of each bus, pu.
void bus_power_flows(const CMat& Y, const Vec& V, const Vec& theta, Vec& P, Vec& Q);

/// Analytic partials of the bus flows with respect to V and theta.
void flow_jacobian(const CMat& Y, const Vec& V, const Vec& theta,
                   Mat& dP_dV, Mat& dP_dth, Mat& dQ_dV, Mat& dQ_dth);

/// Sum of bus active flows = total series + shunt loss, pu.
double total_network_loss(const CMat& Y, const Vec& V, const Vec& theta);

}  // namespace psim
