#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pptgnn/errors.hpp"
#include "pptgnn/flow_ingest.hpp"
#include "pptgnn/kv_config.hpp"

using namespace pptgnn;
using testutil::make_flow;

namespace {

const char* kHeader =
    "flow_id,start_time,end_time,src_ip,dst_ip,src_port,dst_port,protocol,in_bytes,out_bytes,in_pkts,out_pkts,"
    "tcp_flags,attack\n";

std::string row(int id, double start, double end, const char* attack = "") {
  return std::to_string(id) + "," + format_double(start) + "," + format_double(end) +
         ",10.0.0.1,10.0.0.2,1234,80,6,100,200,3,4,24," + attack + "\n";
}

}  // namespace

TEST_CASE("csv rows come back in start-time order") {
  const std::string text = std::string(kHeader) + row(1, 5, 6) + row(2, 1, 2, "DoS") + row(3, 3, 9, "Benign");
  LoadResult r = parse_flow_csv(text, CsvSchema::canonical());
  REQUIRE(r.records.size() == 3);
  CHECK(r.accepted == 3);
  CHECK(r.rejected == 0);
  CHECK(r.records[0].flow_id == 2);
  CHECK(r.records[1].flow_id == 3);
  CHECK(r.records[2].flow_id == 1);
  CHECK(r.records[1].duration == doctest::Approx(6.0));
}

TEST_CASE("shuffled rows load identically to sorted rows") {
  const std::string sorted = std::string(kHeader) + row(1, 1, 2) + row(2, 2, 3) + row(3, 2, 2.5) + row(4, 7, 8);
  const std::string shuffled = std::string(kHeader) + row(4, 7, 8) + row(3, 2, 2.5) + row(1, 1, 2) + row(2, 2, 3);
  CHECK(parse_flow_csv(sorted, CsvSchema::canonical()).records ==
        parse_flow_csv(shuffled, CsvSchema::canonical()).records);
}

TEST_CASE("row with end before start is rejected with its line number") {
  const std::string text = std::string(kHeader) + row(1, 1, 2) + row(2, 5, 4);
  LoadResult r = parse_flow_csv(text, CsvSchema::canonical());
  CHECK(r.records.size() == 1);
  CHECK(r.rejected == 1);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].line == 3);
}

TEST_CASE("unparseable timestamp and duplicate ids are row errors") {
  const std::string text = std::string(kHeader) + row(1, 1, 2) +
                           "2,yesterday,3,10.0.0.1,10.0.0.2,1,2,6,1,1,1,1,0,\n" + row(1, 4, 5);
  LoadResult r = parse_flow_csv(text, CsvSchema::canonical());
  CHECK(r.records.size() == 1);
  REQUIRE(r.diagnostics.size() == 2);
  CHECK(r.diagnostics[0].line == 3);
  CHECK(r.diagnostics[0].message.find("timestamp") != std::string::npos);
  CHECK(r.diagnostics[1].line == 4);
}

TEST_CASE("missing column is a schema error naming it") {
  const std::string text = "start_time,end_time,src_ip\n1,2,a\n";
  try {
    parse_flow_csv(text, CsvSchema::canonical());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("dst_ip") != std::string::npos);
  }
}

TEST_CASE("empty file gives no records") {
  CHECK(parse_flow_csv("", CsvSchema::canonical()).records.empty());
  CHECK(parse_flow_csv(kHeader, CsvSchema::canonical()).records.empty());
}

TEST_CASE("schema maps fields onto other column names") {
  const CsvSchema schema = CsvSchema::from_text("src_ip = IPV4_SRC_ADDR\nattack = Attack\n");
  const std::string text =
      "flow_id,start_time,end_time,IPV4_SRC_ADDR,dst_ip,src_port,dst_port,protocol,in_bytes,out_bytes,in_pkts,"
      "out_pkts,tcp_flags,Attack\n1,0,1,192.168.1.9,10.0.0.2,1,2,17,5,6,1,1,0,scanning\n";
  LoadResult r = parse_flow_csv(text, schema);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].src_ip == "192.168.1.9");
  CHECK(r.records[0].attack_name == "scanning");
  CHECK_THROWS_AS(CsvSchema::from_text("not_a_field = x\n"), SchemaError);
}

TEST_CASE("iso-8601 timestamps") {
  CHECK(*parse_iso8601("2019-05-04T12:00:01Z") == 1556971201.0);
  CHECK(*parse_iso8601("2019-05-04 12:00:01.250Z") == 1556971201.25);
  CHECK(*parse_iso8601("2019-05-04T14:00:01+02:00") == 1556971201.0);
  CHECK_FALSE(parse_iso8601("2019-13-04T12:00:01Z"));
  CHECK_FALSE(parse_iso8601("12:00"));
}

TEST_CASE("vocabulary puts benign first and sorts attacks") {
  const LabelVocabulary v({"Scan", "benign", "DoS", "Scan"});
  REQUIRE(v.size() == 3);
  CHECK(v.name(0) == "Benign");
  CHECK(v.name(1) == "DoS");
  CHECK(v.name(2) == "Scan");
  CHECK(*v.index_of("Scan") == 2);
  CHECK_FALSE(v.index_of("Worm"));
  CHECK(LabelVocabulary::parse(v.serialize()) == v);
  std::vector<FlowRecord> records = {make_flow(1, 0, 1, "a", "b")};
  records[0].attack_name = "Worm";
  CHECK_THROWS_AS(v.assign(records), SchemaError);
}

TEST_CASE("codec statistics and encoding") {
  std::vector<FlowRecord> flows = {make_flow(1, 0, 1, "a", "b"), make_flow(2, 0, 1, "a", "b")};
  flows[0].in_bytes = 100;
  flows[1].in_bytes = 300;
  flows[0].out_bytes = flows[1].out_bytes = 7;
  const FeatureCodec codec = fit_codec(flows);
  CHECK(codec.protocol_vocab.size() == 1);
  CHECK(codec.feature_dim() == 7 + 1 + 8);
  CHECK(codec.numeric_stats[0].mean == 200.0);
  CHECK(codec.numeric_stats[0].std == doctest::Approx(100.0));  // population std
  CHECK(codec.numeric_stats[1].std == kMinStd);

  const auto v0 = encode_flow(flows[0], codec);
  CHECK(v0[0] == doctest::Approx(-1.0));
  CHECK(v0[1] == 0.0);

  FlowRecord mean_record = flows[0];
  mean_record.in_bytes = 200;
  mean_record.tcp_flags = 0x12;
  mean_record.protocol = 17;  // unseen
  mean_record.in_pkts = static_cast<uint64_t>(codec.numeric_stats[2].mean);
  const auto v = encode_flow(mean_record, codec);
  CHECK(v[0] == 0.0);
  CHECK(v[7] == 0.0);  // one-hot all zero
  const std::vector<double> bits(v.begin() + 8, v.end());
  CHECK(bits == std::vector<double>{0, 1, 0, 0, 1, 0, 0, 0});
  CHECK(encode_flow(mean_record, codec) == v);
  CHECK_THROWS_AS(fit_codec(std::vector<FlowRecord>{}), EmptyDataError);
}

TEST_CASE("codec serialization and fixed protocol vocabulary") {
  std::vector<FlowRecord> flows = {make_flow(1, 0, 1, "a", "b"), make_flow(2, 1, 3, "c", "b")};
  const FeatureCodec codec = fit_codec(flows);
  CHECK(FeatureCodec::parse(codec.serialize()) == codec);
  CHECK(FeatureCodec::parse(codec.serialize()).hash() == codec.hash());
  CodecOptions fixed;
  fixed.protocol_vocab = std::vector<uint8_t>{1, 6, 17};
  CHECK(fit_codec(flows, fixed).feature_dim() == 7 + 3 + 8);
  // Encoding a disjoint split leaves the codec untouched.
  const FeatureCodec before = codec;
  encode_flow(make_flow(9, 4, 5, "x", "y"), codec);
  CHECK(codec == before);
}

TEST_CASE("flow cache round trip and corruption") {
  std::vector<FlowRecord> flows = {make_flow(1, 0.5, 1.25, "10.0.0.1", "10.0.0.2", 0),
                                   make_flow(2, 1, 3, "fe80::1", "10.0.0.2", 1)};
  flows[1].attack_name = "DoS";
  const std::string bytes = encode_flow_cache(flows);
  CHECK(bytes.substr(0, 4) == "PPTF");
  CHECK(decode_flow_cache(bytes) == flows);
  CHECK(encode_flow_cache(decode_flow_cache(bytes)) == bytes);
  CHECK_THROWS_AS(decode_flow_cache(bytes.substr(0, bytes.size() - 3)), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_flow_cache(bad), FormatError);
}

TEST_CASE("canonical csv round trip") {
  std::vector<FlowRecord> flows = {make_flow(1, 0.125, 1.5, "a,b", "c", 0), make_flow(2, 1, 3, "d", "e", 1)};
  flows[0].attack_name = "Benign";
  flows[1].attack_name = "DoS";
  LoadResult r = parse_flow_csv(to_canonical_csv(flows), CsvSchema::canonical());
  CHECK(r.records == flows);
}
