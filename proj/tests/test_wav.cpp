#include "doctest.h"

#include "festa/wav.hpp"
#include "test_support.hpp"

using namespace festa;

TEST_SUITE("wav") {

TEST_CASE("encode/decode round-trip preserves samples and format") {
  wav::WavData in;
  in.sample_rate = 16000;
  in.channels = 1;
  for (int i = 0; i < 1000; ++i) in.samples.push_back(static_cast<int16_t>(i * 13 - 6000));
  const auto bytes = wav::encode(in);
  const auto out = wav::decode(bytes);
  CHECK(out.sample_rate == in.sample_rate);
  CHECK(out.channels == in.channels);
  CHECK(out.samples == in.samples);
}

TEST_CASE("stereo round-trip") {
  wav::WavData in;
  in.sample_rate = 44100;
  in.channels = 2;
  for (int i = 0; i < 500; ++i) {
    in.samples.push_back(static_cast<int16_t>(i));
    in.samples.push_back(static_cast<int16_t>(-i));
  }
  const auto out = wav::decode(wav::encode(in));
  CHECK(out.channels == 2);
  CHECK(out.frame_count() == 500);
  CHECK(out.samples == in.samples);
}

TEST_CASE("malformed inputs are rejected") {
  CHECK_THROWS_AS(wav::decode({1, 2, 3}), InputError);
  std::vector<uint8_t> junk(64, 0);
  CHECK_THROWS_AS(wav::decode(junk), InputError);
  // valid header, truncated chunk
  auto bytes = wav::encode(testing::labeled_clip(1).audio);
  bytes.resize(bytes.size() - 10);
  CHECK_THROWS_AS(wav::decode(bytes), InputError);
}

TEST_CASE("non-PCM format is rejected") {
  auto bytes = wav::encode(testing::labeled_clip(1).audio);
  bytes[20] = 3;  // IEEE float format tag
  CHECK_THROWS_AS(wav::decode(bytes), InputError);
}

}  // TEST_SUITE
