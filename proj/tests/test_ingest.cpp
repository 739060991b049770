#include "jitchrono/error.hpp"
#include "jitchrono/ingest.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace jitchrono;

namespace {

const std::string kHeader = "commit_id,commit_ts,la,ld,lt,ns,nd,nf,entropy,nuc,ndev,age,exp,rexp,sexp,fix,bug\n";

std::string row(const std::string& id, const std::string& ts, const std::string& bug, const std::string& fix = "0") {
    return id + "," + ts + ",1,2,3,1,1,2,0.5,3,2,10,100,50,20," + fix + "," + bug + "\n";
}

Dataset load(const std::string& text, const SchemaMap& schema = SchemaMap::defaults(), LoadOptions opts = {}) {
    std::istringstream in(text);
    return load_dataset(in, schema, "t", opts);
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Io;
}

}  // namespace

TEST(Ingest, MetricNamesRoundTrip) {
    ASSERT_EQ(metric_names().size(), kMetricCount);
    for (std::size_t f = 0; f < kMetricCount; ++f) {
        const auto m = static_cast<Metric>(f);
        EXPECT_EQ(metric_from_name(metric_name(m)), m);
    }
    EXPECT_FALSE(metric_from_name("churn"));
}

TEST(Ingest, HeaderOnlyIsEmptyInput) {
    EXPECT_EQ(code_of([] { load(kHeader); }), ErrorCode::EmptyInput);
    EXPECT_EQ(code_of([] { load(""); }), ErrorCode::EmptyInput);
}

TEST(Ingest, ShuffledRowsComeBackSorted) {
    const auto d = load(kHeader + row("c", "300", "0") + row("a", "100", "1") + row("b", "200", "0"));
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.records()[0].id, "a");
    EXPECT_EQ(d.records()[1].id, "b");
    EXPECT_EQ(d.records()[2].id, "c");
    EXPECT_TRUE(d.records()[0].defective);
}

TEST(Ingest, EqualTimestampsOrderById) {
    const auto d = load(kHeader + row("z", "100", "0") + row("m", "100", "1"));
    EXPECT_EQ(d.records()[0].id, "m");
}

TEST(Ingest, ColumnsFoundByHeaderNameInAnyOrder) {
    const std::string text =
        "bug,fix,sexp,rexp,exp,age,ndev,nuc,entropy,nf,nd,ns,lt,ld,la,commit_ts,commit_id,extra\n"
        "true,1,20,50,100,10,2,3,0.5,2,1,1,3,2,1,1000,x,ignored\n";
    const auto d = load(text);
    const auto& r = d.records()[0];
    EXPECT_EQ(r.id, "x");
    EXPECT_EQ(r.timestamp, 1000);
    EXPECT_DOUBLE_EQ(r.metric(Metric::la), 1.0);
    EXPECT_DOUBLE_EQ(r.metric(Metric::sexp), 20.0);
    EXPECT_DOUBLE_EQ(r.metric(Metric::fix), 1.0);
    EXPECT_TRUE(r.defective);
}

TEST(Ingest, SchemaOverrideAndDelimiter) {
    auto schema = SchemaMap::defaults();
    schema.set("label", "contains_bug");
    schema.set("timestamp", "author_date");
    std::string text = kHeader;
    text.replace(text.find("bug\n"), 3, "contains_bug");
    text.replace(text.find("commit_ts"), 9, "author_date");
    for (char& c : text)
        if (c == ',') c = ';';
    std::string body = row("a", "2005-03-01T12:00:00Z", "1");
    for (char& c : body)
        if (c == ',') c = ';';
    const auto d = load(text + body, schema, LoadOptions{';'});
    EXPECT_EQ(d.records()[0].timestamp, 1109678400);
    EXPECT_EQ(code_of([&] { schema.set("nonsense", "x"); }), ErrorCode::InvalidArgument);
}

TEST(Ingest, MissingColumnIsSchemaMismatch) {
    EXPECT_EQ(code_of([] { load("commit_id,commit_ts,la\nx,1,1\n"); }), ErrorCode::SchemaMismatch);
}

TEST(Ingest, BadRowsReportLine) {
    try {
        load(kHeader + row("a", "100", "0") + row("b", "yesterday", "0"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_EQ(code_of([] { load(kHeader + row("a", "100", "2")); }), ErrorCode::MalformedRow);
    EXPECT_EQ(code_of([] { load(kHeader + row("a", "100", "0", "0.5")); }), ErrorCode::MalformedRow);
    EXPECT_EQ(code_of([] { load(kHeader + "a,100,1,2\n"); }), ErrorCode::MalformedRow);
    EXPECT_EQ(code_of([] { load(kHeader + "a,100,-1,2,3,1,1,2,0.5,3,2,10,100,50,20,0,0\n"); }),
              ErrorCode::MalformedRow);
    EXPECT_EQ(code_of([] { load(kHeader + "a,100,nan,2,3,1,1,2,0.5,3,2,10,100,50,20,0,0\n"); }),
              ErrorCode::MalformedRow);
}

TEST(Ingest, DuplicateIdsAreAnError) {
    EXPECT_EQ(code_of([] { load(kHeader + row("a", "100", "0") + row("a", "200", "1")); }), ErrorCode::DuplicateId);
}

TEST(Ingest, QuotesBomAndCrlf) {
    const std::string text = "\xEF\xBB\xBF" + kHeader.substr(0, kHeader.size() - 1) + "\r\n" +
                             "\"id,with,commas\",100,1,2,3,1,1,2,0.5,3,2,10,100,50,20,0,1\r\n\r\n";
    const auto d = load(text);
    EXPECT_EQ(d.records()[0].id, "id,with,commas");
}

TEST(Ingest, MissingFileIsIo) {
    EXPECT_EQ(code_of([] { load_dataset_file("/nonexistent/file.csv", SchemaMap::defaults()); }), ErrorCode::Io);
}

TEST(Timestamps, ParseForms) {
    EXPECT_EQ(parse_timestamp("1109678400"), 1109678400);
    EXPECT_EQ(parse_timestamp("1109678400.0"), 1109678400);
    EXPECT_EQ(parse_timestamp("2005-03-01"), 1109635200);
    EXPECT_EQ(parse_timestamp("2005-03-01T12:00:00Z"), 1109678400);
    EXPECT_EQ(parse_timestamp("2005-03-01 12:00"), 1109678400);
    EXPECT_EQ(parse_timestamp("2005-03-01T14:00:00+02:00"), 1109678400);
    EXPECT_EQ(parse_timestamp("2005-03-01T07:00:00-0500"), 1109678400);
    EXPECT_EQ(parse_timestamp("2005-03-01T12:00:00.75Z"), 1109678400);
    EXPECT_FALSE(parse_timestamp("2005-13-01"));
    EXPECT_FALSE(parse_timestamp("2005-02-30"));
    EXPECT_FALSE(parse_timestamp("12.5"));
    EXPECT_FALSE(parse_timestamp(""));
}

TEST(Timestamps, AddMonthsClampsDay) {
    const Timestamp jan31 = *parse_timestamp("2004-01-31T10:00:00Z");
    EXPECT_EQ(format_iso8601(add_months(jan31, 1)), "2004-02-29T10:00:00Z");
    EXPECT_EQ(format_iso8601(add_months(jan31, 13)), "2005-02-28T10:00:00Z");
    EXPECT_EQ(format_iso8601(add_months(jan31, 6)), "2004-07-31T10:00:00Z");
}

TEST(Stratify, MonthsZeroSevenThirteen) {
    const Timestamp t0 = *parse_timestamp("2001-05-01");
    std::vector<ChangeRecord> recs{fixture::record("a", t0, false), fixture::record("b", add_months(t0, 7), true),
                                   fixture::record("c", add_months(t0, 13), false)};
    const auto pd = stratify(Dataset::from_records(recs, "m"), 6);
    ASSERT_EQ(pd.size(), 3u);
    for (int k = 1; k <= 3; ++k) {
        ASSERT_EQ(pd.period(k).size(), 1u);
        EXPECT_EQ(pd.period(k).index, k);
    }
    EXPECT_EQ(pd.period(2).records[0].id, "b");
    EXPECT_THROW(pd.period(4), Error);
    EXPECT_THROW(pd.period(0), Error);
}

TEST(Stratify, ShortSpanIsOnePeriod) {
    const Timestamp t0 = *parse_timestamp("2001-05-01");
    std::vector<ChangeRecord> recs{fixture::record("a", t0, false), fixture::record("b", t0 + 86400 * 100, true)};
    EXPECT_EQ(stratify(Dataset::from_records(recs, "s"), 6).size(), 1u);
}

TEST(Stratify, EmptyMiddlePeriodsAreKept) {
    const Timestamp t0 = *parse_timestamp("2001-05-01");
    std::vector<ChangeRecord> recs{fixture::record("a", t0, false), fixture::record("b", add_months(t0, 20), true)};
    const auto pd = stratify(Dataset::from_records(recs, "gap"), 6);
    ASSERT_EQ(pd.size(), 4u);
    EXPECT_EQ(pd.period(2).size(), 0u);
    EXPECT_EQ(pd.period(3).size(), 0u);
}

TEST(Stratify, PropertiesOnRandomDatasets) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        std::vector<ChangeRecord> recs;
        const Timestamp t0 = *parse_timestamp("2000-01-31T23:59:59Z");
        const std::size_t n = 5 + rng.below(200);
        for (std::size_t i = 0; i < n; ++i)
            recs.push_back(fixture::record("r" + std::to_string(i),
                                           t0 + static_cast<Timestamp>(rng.below(4 * 365 * 86400)), rng.coin()));
        const auto d = std::make_shared<const Dataset>(Dataset::from_records(recs, "p"));
        const int window = 1 + static_cast<int>(rng.below(12));
        const auto pd = stratify(d, window);
        std::vector<std::string> ids;
        for (std::size_t k = 0; k < pd.size(); ++k) {
            const auto& p = pd.periods()[k];
            EXPECT_EQ(p.index, static_cast<int>(k) + 1);
            EXPECT_EQ(p.start, add_months(pd.periods()[0].start, static_cast<int>(k) * window));
            if (k + 1 < pd.size()) EXPECT_EQ(p.end, pd.periods()[k + 1].start);
            for (const auto& r : p.records) {
                EXPECT_GE(r.timestamp, p.start);
                EXPECT_LT(r.timestamp, p.end);
                ids.push_back(r.id);
            }
        }
        ASSERT_EQ(ids.size(), d->size());
        for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(ids[i], d->records()[i].id);
        const auto again = stratify(d, window);
        ASSERT_EQ(again.size(), pd.size());
        for (std::size_t k = 0; k < pd.size(); ++k) {
            EXPECT_EQ(again.periods()[k].start, pd.periods()[k].start);
            EXPECT_EQ(again.periods()[k].first, pd.periods()[k].first);
            EXPECT_EQ(again.periods()[k].size(), pd.periods()[k].size());
        }
    }
}

TEST(Summarize, FourRecordsOneDefect) {
    std::vector<ChangeRecord> recs{fixture::record("a", 10, false), fixture::record("b", 20, true),
                                   fixture::record("c", 30, false), fixture::record("d", 40, false)};
    const auto s = summarize(Dataset::from_records(recs, "four"));
    EXPECT_EQ(s.n_changes, 4u);
    EXPECT_EQ(s.n_defective, 1u);
    EXPECT_DOUBLE_EQ(s.defect_ratio, 0.25);
    EXPECT_EQ(s.first, 10);
    EXPECT_EQ(s.last, 40);
}
