#include "tabeval/digest.hpp"
#include "tabeval/unroll.hpp"

namespace tabeval {

namespace {

constexpr std::string_view kPreamble =
    "You are a helpful AI assistant to help infer useful information from table structures. You are given a "
    "table in markdown format. Your goal is to write all the details conveyed in the table in the form of natural "
    "language statements. A statement is an atomic unit of information from the table.\n"
    "\n"
    "Following the below instructions to do so:\n"
    "\n"
    "1. Identify the column headers in the table.\n"
    "2. Identify the various rows in the table.\n"
    "3. From each row, identify meaningful and atomic pieces of information that cannot be broken down further.\n"
    "4. First, identify columns as primary key(s). A primary key is the column or columns that contain values "
    "that uniquely identify each row in a table.\n"
    "5. If there is only one primary key identified, use it and add information from each of the other columns "
    "one-by-one to form meaningful statements.\n"
    "6. If there are more than one primary key identified, use them and add information from each of the other "
    "columns one-by-one to form meaningful statements.\n"
    "7. If no primary key is detected, then form the statements by picking two columns at a time that make the "
    "most sense in a meaningful manner.\n"
    "8. In each of the above three cases, add information from other columns (beyond the primary key column(s) or "
    "the identified two columns in the absence of a primary key) only if it is necessary to differentiate "
    "repeating entities.\n"
    "9. Write all such statements in natural language.\n"
    "10. Do not exclude any detail that is present in the given table.\n"
    "11. Give the supporting rows for each atomic statement.\n"
    "\n"
    "Following are a few examples.\n"
    "\n"
    "EXAMPLE 1\n"
    "\n"
    "Title: Koch\n"
    "\n"
    "Table:\n"
    "|Year|     Competition     |         Venue        |Position|Event|Notes|\n"
    "|----|---------------------|----------------------|--------|-----|-----|\n"
    "|1966|European Indoor Games|Dortmund, West Germany|  1st   |400 m| 47.9| \n"
    "|1967|European Indoor Games|Prague, Czechoslovakia|  2nd   |400 m| 48.6| \n"
    "\n"
    "Statements:\n"
    "1. European Indoor Games in 1966 occurred in Dortmund, West Germany.\n"
    "2. 1st position was obtained in the 1966 European Indoor Games.\n"
    "3. The 1966 European Indoor Games had a 400 m event.\n"
    "4. 47.9 in the 1966 European Indoor Games.\n"
    "5. European Indoor Games in 1967 occurred in Prague, Czechoslovakia.\n"
    "6. 2nd position was obtained in the 1967 European Indoor Games.\n"
    "7. The 1967 European Indoor Games had a 400 m event.\n"
    "8. 48.6 in the 1967 European Indoor Games.\n"
    "\n"
    "Rows:\n"
    "1. | 1966 | European Indoor Games | Dortmund, West Germany | 1st | 400m | 47.9 |\n"
    "2. | 1967 | European Indoor Games | Prague, Czechoslovakia | 2nd | 400m | 48.6 |\n"
    "\n"
    "Example Bad Statements:\n"
    "1. Koch came in 1st position in European Indoor Games in 1966 which occurred in Dortmund, West Germany.\n"
    "2. 47.9 in European Indoor Games in 1966 which occurred in Dortmund, West Germany.\n"
    "3. 2nd position in European Indoor Games in 1967 which occurred in Prague, Czechoslovakia.\n"
    "\n"
    "EXAMPLE 2\n"
    "\n"
    "Title: Isabella Rice - Film\n"
    "\n"
    "Table:\n"
    "|Year|               Title                |        Role        |Notes|\n"
    "|----|------------------------------------|--------------------|-----|\n"
    "|2015|Kidnapped: The Hannah Anderson Story|   Becca McKinnon   | NaN | \n"
    "|2015|       Jem and the Holograms        |Young Jerrica Benton| NaN | \n"
    "|2015|             Asomatous              |    Sophie Gibbs    | NaN | \n"
    "|2017|           Unforgettable            |         Lily       | NaN | \n"
    "|2019|             Our Friend             |         Molly      | NaN |\n"
    "\n"
    "Statements:\n"
    "1. Kidnapped: The Hannah Anderson Story was filmed in 2015.\n"
    "2. Isabella Rice played the role of Becca McKinnon in Kidnapped: The Hannah Anderson Story.\n"
    "3. Jem and the Holograms was filmed in 2015.\n"
    "4. Isabella Rice played the role of Young Jerrica Benton in Jem and the Holograms.\n"
    "5. Asomatous was filmed in 2015.\n"
    "6. Isabella Rice played the role of Sophie Gibbs in Asomatous.\n"
    "7. Unforgettable was filmed in 2017.\n"
    "8. Isabella Rice played the role of Lily in Unforgettable.\n"
    "9. Our Friend was filmed in 2019.\n"
    "10. Isabella Rice played the role of Molly in Our Friend.\n"
    "\n"
    "Rows:\n"
    "1. | 2015 | Kidnapped: The Hannah Anderson Story | Becca McKinnon | NaN |\n"
    "2. | 2015 | Jem and the Holograms | Young Jerrica Benton | NaN |\n"
    "3. | 2015 | Asomatous | Sophie Gibbs | NaN |\n"
    "4. | 2017 | Unforgettable | Lily | NaN |\n"
    "5. | 2019 | Our Friend | Molly | NaN |\n"
    "\n"
    "Example Bad Statements:\n"
    "1. Isabella Rice played the role of Becca McKinnon in Kidnapped: The Hannah Anderson Story in 2015.\n"
    "2. Jem and the Holograms was filmed in 2015 where Isabella Rice played the role of Young Jerrica Benton.\n"
    "3. Isabella Rice played the role of Sophie Gibbs in Asomatous in 2015.\n"
    "\n";

// Filled with the intent and the markdown rendering of the target table.
constexpr std::string_view kTitleLabel = "Title: ";
constexpr std::string_view kTableLabel = "Table:\n";

}  // namespace

std::string build_unroll_prompt(const Table& table) {
  std::string out(kPreamble);
  out += kTitleLabel;
  out += table.intent;
  out += "\n\n";
  out += kTableLabel;
  out += render_markdown(table);
  out += "\n";
  return out;
}

const std::string& unroll_prompt_version() {
  static const std::string version = [] {
    std::string tmpl(kPreamble);
    tmpl += kTitleLabel;
    tmpl += kTableLabel;
    return "tabunroll-" + sha256_hex(tmpl).substr(0, 12);
  }();
  return version;
}

}  // namespace tabeval
