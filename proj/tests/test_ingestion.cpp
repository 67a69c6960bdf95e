#include <gtest/gtest.h>

#include "fnd/ingestion.hpp"
#include "fnd/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fnd;
using testutil::TempDir;
using testutil::write_file;

namespace {

struct Files {
  TempDir dir{"ingest"};
  void edges(const std::string& body) { write_file(dir / "edges.csv", "follower,followee\n" + body); }
  void engagements(const std::string& body) { write_file(dir / "engagements.csv", "news_id,user_id,count\n" + body); }
  void labels(const std::string& body) { write_file(dir / "labels.csv", "news_id,label\n" + body); }
  Corpus load() const { return load_corpus(CorpusPaths::in_directory(dir.path())); }
};

std::string error_of(const Files& f) {
  try {
    f.load();
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Ingestion, DuplicateEngagementRowsAreSummed) {
  Files f;
  f.edges("u1,u2\n");
  f.engagements("n1,u1,2\nn1,u1,3\n");
  f.labels("n1,fake\n");
  const auto c = f.load();
  ASSERT_EQ(c.table.num_news(), 1u);
  const auto& rec = c.table.news(0);
  ASSERT_EQ(rec.spreaders.size(), 1u);
  EXPECT_EQ(rec.spreaders[0].second, 5u);
  EXPECT_EQ(c.report.engagement_rows_merged, 1u);
}

TEST(Ingestion, EmptyEngagementsGiveEmptyTable) {
  Files f;
  f.edges("a,b\nb,c\n");
  f.engagements("");
  f.labels("");
  const auto c = f.load();
  EXPECT_EQ(c.table.num_news(), 0u);
  EXPECT_EQ(c.table.num_records(), 0u);
  EXPECT_EQ(c.graph.num_edges(), 2u);
}

TEST(Ingestion, SingleUserStats) {
  Files f;
  f.edges("");
  f.engagements("n1,solo,1\n");
  f.labels("n1,fake\n");
  const auto c = f.load();
  EXPECT_EQ(corpus_stats(c.graph, c.table), (CorpusStats{1, 0, 1, 1, 1, 0}));
}

TEST(Ingestion, MalformedRowReportsLine) {
  Files f;
  f.edges("a,b\nb\n");
  f.engagements("");
  f.labels("");
  const auto msg = error_of(f);
  EXPECT_NE(msg.find("edges.csv:3"), std::string::npos) << msg;
}

TEST(Ingestion, BadCountRejected) {
  Files f;
  f.edges("a,b\n");
  f.engagements("n1,a,zero\n");
  f.labels("n1,true\n");
  EXPECT_NE(error_of(f).find("engagements.csv:2"), std::string::npos);
  f.engagements("n1,a,0\n");
  EXPECT_FALSE(error_of(f).empty());
}

TEST(Ingestion, SelfLoopsRejectedWithCount) {
  Files f;
  f.edges("a,a\nb,b\na,b\n");
  f.engagements("");
  f.labels("");
  const auto msg = error_of(f);
  EXPECT_NE(msg.find("2 self-loop"), std::string::npos) << msg;
}

TEST(Ingestion, ConflictingLabelsRejected) {
  Files f;
  f.edges("a,b\n");
  f.engagements("n1,a,1\n");
  f.labels("n1,fake\nn1,true\n");
  EXPECT_NE(error_of(f).find("conflicting"), std::string::npos);
}

TEST(Ingestion, RepeatedIdenticalLabelAccepted) {
  Files f;
  f.edges("a,b\n");
  f.engagements("n1,a,1\n");
  f.labels("n1,fake\nn1,fake\n");
  EXPECT_EQ(f.load().table.num_news(), 1u);
}

TEST(Ingestion, UnknownLabelValueRejected) {
  Files f;
  f.edges("a,b\n");
  f.engagements("n1,a,1\n");
  f.labels("n1,satire\n");
  EXPECT_NE(error_of(f).find("labels.csv:2"), std::string::npos);
}

TEST(Ingestion, EngagementWithoutLabelRejected) {
  Files f;
  f.edges("a,b\n");
  f.engagements("n2,a,1\n");
  f.labels("n1,fake\n");
  EXPECT_NE(error_of(f).find("no label"), std::string::npos);
}

TEST(Ingestion, DanglingUserRejectedWhenUsersDeclared) {
  Files f;
  write_file(f.dir / "users.csv", "user_id\na\nb\n");
  f.edges("a,b\n");
  f.engagements("n1,c,1\n");
  f.labels("n1,fake\n");
  EXPECT_NE(error_of(f).find("dangling"), std::string::npos);
  f.engagements("n1,a,1\n");
  f.edges("a,zz\n");
  EXPECT_NE(error_of(f).find("dangling"), std::string::npos);
}

TEST(Ingestion, WrongHeaderRejected) {
  Files f;
  write_file(f.dir / "edges.csv", "src,dst\na,b\n");
  f.engagements("");
  f.labels("");
  EXPECT_FALSE(error_of(f).empty());
}

TEST(Ingestion, MissingFileRejected) {
  Files f;
  f.edges("a,b\n");
  f.labels("");
  EXPECT_NE(error_of(f).find("engagements.csv"), std::string::npos);
}

TEST(Ingestion, DuplicateEdgesDroppedAndReported) {
  Files f;
  f.edges("a,b\na,b\nb,a\n");
  f.engagements("");
  f.labels("");
  const auto c = f.load();
  EXPECT_EQ(c.graph.num_edges(), 2u);  // reciprocal pair kept
  EXPECT_EQ(c.report.duplicate_edges_dropped, 1u);
  EXPECT_EQ(c.report.warnings.size(), 1u);
}

TEST(Ingestion, QuotedFieldsAndCrlf) {
  Files f;
  write_file(f.dir / "edges.csv", "follower,followee\r\n\"a,1\",b\r\n");
  f.engagements("n1,\"a,1\",2\n");
  f.labels("n1,true\n");
  const auto c = f.load();
  ASSERT_TRUE(c.graph.find("a,1"));
  EXPECT_TRUE(c.graph.has_edge(*c.graph.find("a,1"), *c.graph.find("b")));
}

TEST(Ingestion, RoundTripOnRandomCorpora) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto rc = oracle::random_corpus(seed);
    TempDir dir("roundtrip");
    write_corpus(rc.graph, rc.table, dir.path());
    const auto c = load_corpus(CorpusPaths::in_directory(dir.path()));
    EXPECT_EQ(c.graph, rc.graph) << seed;
    EXPECT_EQ(c.table, rc.table) << seed;
  }
}

TEST(Ingestion, SyntheticOutputMatchesGeneratorBookkeeping) {
  SyntheticSpec spec = SyntheticSpec::strong(11);
  spec.users = 100;
  spec.news_per_class = 10;
  spec.base_spreaders = 6;
  const auto s = generate_synthetic(spec);
  TempDir dir("synth");
  write_synthetic(s, dir.path());
  const auto c = load_corpus(CorpusPaths::in_directory(dir.path()));
  const auto truth = nlohmann::json::parse(testutil::read_file(dir / "truth.json"));
  const auto st = corpus_stats(c.graph, c.table);
  EXPECT_EQ(st.users, truth["users"].get<std::size_t>());
  EXPECT_EQ(st.edges, truth["edges"].get<std::size_t>());
  EXPECT_EQ(st.records, truth["records"].get<std::size_t>());
  EXPECT_EQ(st.news, 20u);
  EXPECT_EQ(st.fake, 10u);
  EXPECT_EQ(st.real, 10u);
  ASSERT_EQ(truth["news"].size(), c.table.num_news());
  for (std::size_t i = 0; i < c.table.num_news(); ++i) {
    const auto& t = truth["news"][i];
    const auto& rec = c.table.news(i);
    EXPECT_EQ(rec.id, t["id"].get<std::string>());
    EXPECT_EQ(rec.spreaders.size(), t["spreaders"].get<std::size_t>());
    std::size_t eng = 0;
    for (const auto& [u, n] : rec.spreaders) eng += n;
    EXPECT_EQ(eng, t["engagements"].get<std::size_t>());
    EXPECT_EQ(oracle::induced_edges(c.graph, rec).size(), t["edges"].get<std::size_t>());
  }
}
