#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "presto/csv.hpp"

using namespace presto;

namespace {

Dataset parse(const std::string& text, const std::string& target, bool optional = false) {
    std::istringstream in(text);
    return read_csv(in, target, optional);
}

std::string error_of(const std::string& text, const std::string& target) {
    try {
        parse(text, target);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Csv, ReadsFeaturesAndTarget) {
    const auto d = parse("a,y,b\n1,10,2\n3,30,4\n", "y");
    EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(d.target_name, "y");
    ASSERT_EQ(d.rows(), 2u);
    EXPECT_EQ(d.x(1, 0), 3.0);
    EXPECT_EQ(d.x(1, 1), 4.0);
    EXPECT_EQ(d.y, (std::vector<double>{10.0, 30.0}));
}

TEST(Csv, HandlesBomQuotesCrlfAndBlankLines) {
    const auto d = parse("\xEF\xBB\xBF\"a\",\"y\"\r\n\"1.5\",2\r\n\r\n-3e2,+4\r\n", "y");
    EXPECT_EQ(d.feature_names, std::vector<std::string>{"a"});
    ASSERT_EQ(d.rows(), 2u);
    EXPECT_EQ(d.x(0, 0), 1.5);
    EXPECT_EQ(d.x(1, 0), -300.0);
    EXPECT_EQ(d.y[1], 4.0);
}

TEST(Csv, EmptyFeatureCellIsMissing) {
    const auto d = parse("a,b,y\n,1,2\n", "y");
    EXPECT_TRUE(std::isnan(d.x(0, 0)));
    EXPECT_EQ(d.x(0, 1), 1.0);
}

TEST(Csv, MissingTargetColumnIsNamed) {
    const auto msg = error_of("a,b\n1,2\n", "strength");
    EXPECT_NE(msg.find("strength"), std::string::npos) << msg;
    const auto d = parse("a,b\n1,2\n", "strength", true);
    EXPECT_FALSE(d.has_target());
    EXPECT_EQ(d.x.cols(), 2u);
}

TEST(Csv, BadCellsAreReportedWithLineAndColumn) {
    const auto msg = error_of("a,y\n1,2\nabc,3\n", "y");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'a'"), std::string::npos) << msg;
    EXPECT_NE(error_of("a,y\n1\n", "y").find("expected 2 fields"), std::string::npos);
    EXPECT_NE(error_of("a,y\n1,\n", "y").find("target"), std::string::npos);
    EXPECT_NE(error_of("a,y\n\"1,2\n", "y").find("unterminated"), std::string::npos);
    EXPECT_NE(error_of("", "y").find("empty"), std::string::npos);
}

TEST(Csv, SemicolonFilesAreNotSilentlyAccepted) {
    EXPECT_THROW(parse("a;y\n1;2\n", "y"), DataError);
}

TEST(Csv, MissingFileIsADataError) {
    EXPECT_THROW(read_csv_file("/nonexistent/presto.csv", "y"), DataError);
}
