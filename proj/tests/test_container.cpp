#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ecgi/container.hpp"

using namespace ecgi;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "ecgi_container_tests";
  fs::create_directories(dir);
  return dir / name;
}

Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("round trip is bit-exact for f64 tensors") {
  NamedTensorContainer c;
  auto a = random_matrix(7, 5, 11);
  auto b = random_matrix(3, 1, 12);
  c.add_matrix("A", a);
  c.add_vector("b", b.col(0));
  c.metadata["note"] = "unit";
  c.metadata["count"] = 2;

  auto path = temp_file("roundtrip.ntc");
  save_container(path, c);
  auto back = load_container(path);

  REQUIRE(back.entries().size() == 2);
  REQUIRE(back.entries()[0].name == "A");  // header order preserved
  REQUIRE(back.at("A").to_matrix() == a);
  REQUIRE(back.at("b").to_vector() == b.col(0));
  REQUIRE(back.metadata["note"] == "unit");
  REQUIRE(back.metadata["count"] == 2);
}

TEST_CASE("f32 round trip is bit-exact at declared dtype") {
  NamedTensorContainer c;
  Eigen::MatrixXd m = random_matrix(4, 4, 3);
  // store values representable exactly in f32 after one narrowing pass
  for (int i = 0; i < m.size(); ++i) m.data()[i] = static_cast<double>(static_cast<float>(m.data()[i]));
  c.add("M", Tensor::from_matrix(m), "f32");
  auto path = temp_file("f32.ntc");
  save_container(path, c);
  auto back = load_container(path);
  REQUIRE(back.entries()[0].dtype == "f32");
  REQUIRE(back.at("M").to_matrix() == m);
}

TEST_CASE("duplicate tensor names are rejected") {
  NamedTensorContainer c;
  c.add_matrix("X", Eigen::MatrixXd::Zero(2, 2));
  REQUIRE_THROWS_AS(c.add_matrix("X", Eigen::MatrixXd::Zero(2, 2)), FormatError);
}

TEST_CASE("wrong magic is a format error") {
  auto path = temp_file("badmagic.ntc");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << "NOPE" << std::string(64, '\0');
  out.close();
  REQUIRE_THROWS_AS(load_container(path), FormatError);
}

TEST_CASE("zero-byte file is a format error") {
  auto path = temp_file("empty.ntc");
  std::ofstream(path, std::ios::binary | std::ios::trunc).close();
  REQUIRE_THROWS_AS(load_container(path), FormatError);
}

TEST_CASE("truncated payload is a format error") {
  NamedTensorContainer c;
  c.add_matrix("A", random_matrix(8, 8, 1));
  auto path = temp_file("trunc.ntc");
  save_container(path, c);
  auto size = fs::file_size(path);
  fs::resize_file(path, size - 16);
  REQUIRE_THROWS_AS(load_container(path), FormatError);
}

TEST_CASE("version mismatch is a format error") {
  // hand-build a container with version 2
  nlohmann::json header;
  header["version"] = 2;
  header["endianness"] = "little";
  header["tensors"] = nlohmann::json::array();
  header["metadata"] = nlohmann::json::object();
  std::string htext = header.dump();
  auto path = temp_file("badversion.ntc");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write("NTC1", 4);
  std::uint64_t hsize = htext.size();
  out.write(reinterpret_cast<const char*>(&hsize), 8);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  out.close();
  REQUIRE_THROWS_AS(load_container(path), FormatError);
}

TEST_CASE("missing tensor lookup is a format error") {
  NamedTensorContainer c;
  REQUIRE_THROWS_AS(c.at("nope"), FormatError);
}
