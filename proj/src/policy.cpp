#include "bayrn/policy.hpp"

#include "bayrn/rng.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes little-endian host");

namespace bayrn {

namespace {

void check_arch(const PolicyArch& arch) {
    if (arch.obs_dim <= 0 || arch.hidden <= 0 || arch.act_dim <= 0)
        throw std::invalid_argument("policy arch dims must be positive");
}

// Views into the flat theta layout.
struct ThetaView {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w1;
    Eigen::Map<const Eigen::VectorXd> b1;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w2;
    Eigen::Map<const Eigen::VectorXd> b2;
};

ThetaView view(const PolicyParams& p) {
    const auto& a = p.arch;
    const double* d = p.theta.data();
    const double* w1 = d;
    const double* b1 = w1 + a.hidden * a.obs_dim;
    const double* w2 = b1 + a.hidden;
    const double* b2 = w2 + a.act_dim * a.hidden;
    return {{w1, a.hidden, a.obs_dim}, {b1, a.hidden}, {w2, a.act_dim, a.hidden}, {b2, a.act_dim}};
}

}  // namespace

PolicyParams policy_init(const PolicyArch& arch, std::uint64_t seed) {
    check_arch(arch);
    PolicyParams p;
    p.arch = arch;
    p.theta.resize(arch.param_count());
    auto gen = rng::engine(seed, /*stream=*/0x706f6c, 0, 0);
    const double s1 = 1.0 / std::sqrt(double(arch.obs_dim));
    const double s2 = 1.0 / std::sqrt(double(arch.hidden));
    Eigen::Index k = 0;
    const Eigen::Index n1 = arch.hidden * arch.obs_dim + arch.hidden;
    for (Eigen::Index i = 0; i < n1; ++i) p.theta[k++] = rng::uniform_in(gen, -s1, s1);
    const Eigen::Index n2 = arch.act_dim * arch.hidden + arch.act_dim;
    for (Eigen::Index i = 0; i < n2; ++i) p.theta[k++] = rng::uniform_in(gen, -s2, s2);
    return p;
}

Eigen::VectorXd policy_act(const PolicyParams& policy, const Eigen::VectorXd& obs) {
    if (obs.size() != policy.arch.obs_dim)
        throw std::invalid_argument("policy_act: obs dim mismatch");
    if (policy.theta.size() != policy.arch.param_count())
        throw std::invalid_argument("policy_act: theta length mismatch");
    auto v = view(policy);
    Eigen::VectorXd h = (v.w1 * obs + v.b1).array().tanh();
    Eigen::VectorXd a = (v.w2 * h + v.b2).array().tanh();
    // saturated tanh can round to exactly +-1; keep the open-interval contract
    const double bound = std::nextafter(1.0, 0.0);
    return a.cwiseMax(-bound).cwiseMin(bound);
}

namespace {

constexpr char kMagic[8] = {'B', 'R', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw CheckpointCorruptError("checkpoint truncated");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyParams& policy,
                     const CheckpointMeta& meta) {
    check_arch(policy.arch);
    if (policy.theta.size() != policy.arch.param_count())
        throw std::invalid_argument("save_checkpoint: theta length mismatch");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot open for write: " + path);
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, std::uint32_t(policy.arch.obs_dim));
    put<std::uint32_t>(os, std::uint32_t(policy.arch.hidden));
    put<std::uint32_t>(os, std::uint32_t(policy.arch.act_dim));
    put<std::int64_t>(os, meta.iteration);
    put<std::int64_t>(os, meta.parent_iteration);
    put<double>(os, meta.reward);
    put<std::uint32_t>(os, std::uint32_t(meta.phi.size()));
    os.write(reinterpret_cast<const char*>(meta.phi.data()),
             std::streamsize(sizeof(double) * std::size_t(meta.phi.size())));
    put<std::uint64_t>(os, std::uint64_t(policy.theta.size()));
    os.write(reinterpret_cast<const char*>(policy.theta.data()),
             std::streamsize(sizeof(double) * std::size_t(policy.theta.size())));
    if (!os) throw CheckpointError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open for read: " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CheckpointCorruptError("bad checkpoint magic: " + path);
    const auto version = take<std::uint32_t>(is);
    if (version != kVersion)
        throw CheckpointVersionError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    c.policy.arch.obs_dim = int(take<std::uint32_t>(is));
    c.policy.arch.hidden = int(take<std::uint32_t>(is));
    c.policy.arch.act_dim = int(take<std::uint32_t>(is));
    check_arch(c.policy.arch);
    c.meta.iteration = take<std::int64_t>(is);
    c.meta.parent_iteration = take<std::int64_t>(is);
    c.meta.reward = take<double>(is);
    const auto phi_dim = take<std::uint32_t>(is);
    if (phi_dim > 1u << 20) throw CheckpointCorruptError("absurd phi_dim");
    c.meta.phi.resize(phi_dim);
    is.read(reinterpret_cast<char*>(c.meta.phi.data()),
            std::streamsize(sizeof(double) * phi_dim));
    if (!is) throw CheckpointCorruptError("checkpoint truncated in phi");
    const auto theta_len = take<std::uint64_t>(is);
    if (theta_len != std::uint64_t(c.policy.arch.param_count()))
        throw CheckpointCorruptError("theta length does not match arch");
    c.policy.theta.resize(Eigen::Index(theta_len));
    is.read(reinterpret_cast<char*>(c.policy.theta.data()),
            std::streamsize(sizeof(double) * theta_len));
    if (!is) throw CheckpointCorruptError("checkpoint truncated in theta");
    char extra;
    if (is.read(&extra, 1)) throw CheckpointCorruptError("trailing bytes in checkpoint");
    return c;
}

Checkpoint load_checkpoint(const std::string& path, const PolicyArch& expect) {
    Checkpoint c = load_checkpoint(path);
    if (!(c.policy.arch == expect))
        throw CheckpointArchError("checkpoint arch mismatch: " + path);
    return c;
}

}  // namespace bayrn
