#include "crowdnav/policy/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::policy {

namespace {

constexpr char kMagic[8] = {'C', 'N', 'A', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_vec(std::ostream& os, const Eigen::VectorXd& v) {
  put(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void put_str(std::ostream& os, const std::string& s) {
  put(os, static_cast<std::uint64_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ScenarioInvalid("truncated checkpoint");
  return v;
}

std::uint64_t get_len(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (std::uint64_t{1} << 32)) throw ScenarioInvalid("corrupt checkpoint length");
  return n;
}

Eigen::VectorXd get_vec(std::istream& is) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(get_len(is)));
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
    throw ScenarioInvalid("truncated checkpoint");
  }
  return v;
}

std::string get_str(std::istream& is) {
  std::string s(get_len(is), '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(s.size()))) throw ScenarioInvalid("truncated checkpoint");
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ScenarioInvalid("cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put_vec(os, c.params);
  put_vec(os, c.bn_stats);
  put_vec(os, c.adam_m);
  put_vec(os, c.adam_v);
  put(os, c.adam_t);
  put(os, c.episode);
  put(os, c.updates);
  put(os, c.seed);
  put_str(os, c.rng_state);
  if (!os) throw ScenarioInvalid("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ScenarioInvalid("cannot open " + path);
  char magic[sizeof(kMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ScenarioInvalid(path + " is not a checkpoint");
  }
  if (get<std::uint32_t>(is) != kVersion) throw ScenarioInvalid("unsupported checkpoint version");
  Checkpoint c;
  c.params = get_vec(is);
  c.bn_stats = get_vec(is);
  c.adam_m = get_vec(is);
  c.adam_v = get_vec(is);
  c.adam_t = get<std::int64_t>(is);
  c.episode = get<std::int64_t>(is);
  c.updates = get<std::int64_t>(is);
  c.seed = get<std::uint64_t>(is);
  c.rng_state = get_str(is);
  return c;
}

}  // namespace crowdnav::policy
