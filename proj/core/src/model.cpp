#include "psim/model.hpp"

namespace psim {
namespace {
std::vector<std::string> numbered(const char* prefix, int n) {
    std::vector<std::string> v;
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back(std::string(prefix) + std::to_string(i));
    return v;
}
}  // namespace

std::vector<std::string> DynamicModel::names_zc() const { return numbered("zc", dims().n_zc); }
std::vector<std::string> DynamicModel::names_zd() const { return numbered("zd", dims().n_zd); }
std::vector<std::string> DynamicModel::names_x() const { return numbered("x", dims().n_x); }
std::vector<std::string> DynamicModel::names_y() const { return numbered("y", dims().n_y); }

}  // namespace psim
