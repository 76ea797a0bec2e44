#include "rsmooth/instance_io.hpp"

#include <cstring>
#include <fstream>

namespace rsmooth {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

}  // namespace

nlohmann::json to_json(const InstanceMeta& meta) {
  return {{"problem", meta.problem}, {"m", meta.m},         {"n", meta.n},
          {"r", meta.r},             {"lambda", meta.lambda}, {"seed", meta.seed},
          {"length", meta.length},   {"hash", meta.hash}};
}

InstanceMeta instance_meta_from_json(const nlohmann::json& j) {
  InstanceMeta meta;
  try {
    meta.problem = j.at("problem").get<std::string>();
    meta.m = j.at("m").get<Index>();
    meta.n = j.at("n").get<Index>();
    meta.r = j.at("r").get<Index>();
    meta.lambda = j.at("lambda").get<double>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.length = j.at("length").get<double>();
    meta.hash = j.at("hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("instance sidecar: ") + e.what());
  }
  return meta;
}

std::string matrix_hash(const Matrix& m) {
  const std::int64_t shape[2] = {static_cast<std::int64_t>(m.rows()),
                                 static_cast<std::int64_t>(m.cols())};
  std::uint64_t h = fnv1a(shape, sizeof shape, kFnvOffset);
  h = fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

InstanceMeta save_instance(const std::filesystem::path& stem, const Matrix& data,
                           InstanceMeta meta) {
  meta.hash = matrix_hash(data);
  {
    std::ofstream out(with_ext(stem, ".bin"), std::ios::binary);
    if (!out) throw Error("cannot write " + with_ext(stem, ".bin").string());
    const std::int64_t shape[2] = {static_cast<std::int64_t>(data.rows()),
                                   static_cast<std::int64_t>(data.cols())};
    out.write(reinterpret_cast<const char*>(shape), sizeof shape);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(data.size())));
    if (!out) throw Error("short write to " + with_ext(stem, ".bin").string());
  }
  std::ofstream side(with_ext(stem, ".json"));
  if (!side) throw Error("cannot write " + with_ext(stem, ".json").string());
  side << to_json(meta).dump(2) << '\n';
  return meta;
}

LoadedInstance load_instance(const std::filesystem::path& stem,
                             std::optional<std::uint64_t> expected_seed) {
  std::ifstream side(with_ext(stem, ".json"));
  if (!side) throw IntegrityError("missing sidecar " + with_ext(stem, ".json").string());
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("unreadable sidecar " + with_ext(stem, ".json").string() + ": " + e.what());
  }
  LoadedInstance li;
  li.meta = instance_meta_from_json(j);
  if (expected_seed && *expected_seed != li.meta.seed) {
    throw IntegrityError("instance " + stem.string() + " was generated with seed " +
                         std::to_string(li.meta.seed) + ", replay requested seed " +
                         std::to_string(*expected_seed));
  }

  std::ifstream in(with_ext(stem, ".bin"), std::ios::binary);
  if (!in) throw IntegrityError("missing matrix dump " + with_ext(stem, ".bin").string());
  std::int64_t shape[2] = {0, 0};
  in.read(reinterpret_cast<char*>(shape), sizeof shape);
  if (!in || shape[0] < 0 || shape[1] < 0 || shape[0] > (1 << 26) || shape[1] > (1 << 26)) {
    throw IntegrityError("corrupt matrix header in " + with_ext(stem, ".bin").string());
  }
  li.data.resize(shape[0], shape[1]);
  in.read(reinterpret_cast<char*>(li.data.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(li.data.size())));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    throw IntegrityError("matrix dump " + with_ext(stem, ".bin").string() +
                         " has the wrong length");
  }
  const std::string h = matrix_hash(li.data);
  if (h != li.meta.hash) {
    throw IntegrityError("hash mismatch for " + stem.string() + ": sidecar " + li.meta.hash +
                         ", dump " + h);
  }
  const Index expect_rows = li.meta.problem == "spca" ? li.meta.m : li.meta.n;
  if (li.data.rows() != expect_rows || li.data.cols() != li.meta.n) {
    throw IntegrityError("matrix dump shape disagrees with sidecar dimensions for " +
                         stem.string());
  }
  return li;
}

}  // namespace rsmooth
