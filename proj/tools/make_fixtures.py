#!/usr/bin/env python3
"""Writes the bundled example tables, datasets and scripted transcripts.

Transcript digests are written as placeholders; restamp them by running the
CLI once with --record-transcripts pointed at the same directory (see
tools/restamp.sh).
"""

import csv
import io
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def sql_block(q):
    return "```sql\n" + q + "\n```"


def call(function, args):
    return "function: " + function + "\nargs: " + json.dumps(args)


def write_transcript(path, entries):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for tag, response in entries:
            f.write(json.dumps({"tag": tag, "request_digest": "sha256:pending", "response": response}) + "\n")


def write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


# ---------------------------------------------------------------- worked example

CYCLIST_HEADER = ["Date", "Cyclist", "Medal", "Age"]
CYCLIST_ROWS = [
    ["02-28", "Alej (ESP)", '"2"', "24"],
    ["Feb-10", "Dav. ITA", "1", "31"],
    ["14-Feb", "Alex (ITA)", "3*", "27"],
    ["19-Oct", "Mark (GBR)", "5", "29"],
]
CYCLIST_QUESTION = "Which country has the most medals in total in February?"
CYCLIST_SKETCH = (
    "SELECT country_of(Cyclist) AS Country, SUM(Medal) FROM w WHERE Date LIKE '02-%' "
    "GROUP BY Country ORDER BY SUM(Medal) DESC LIMIT 1"
)
CYCLIST_SQL = "SELECT Country FROM w WHERE Date LIKE '02-%' GROUP BY Country ORDER BY SUM(Medal) DESC LIMIT 1"
PAREN_ONLY = r"lambda x: re.search(r'\((.*?)\)', x).group(1)"
GUARDED = r"lambda x: re.search(r'\((.*?)\)', x).group(1) if '(' in x and ')' in x else x.split(' ')[-1]"
MEDAL_FUNC = "lambda x: int(x.replace('\"', '').replace('*', ''))"


def cyclist_planning():
    return [
        ("planner.sketch", sql_block(CYCLIST_SKETCH)),
        ("planner.clause.1", 'Augment("extract the country code of the cyclist", [Cyclist]) -> Country'),
        ("planner.clause.2", 'Normalize("convert Medal to integers", Medal)'),
        ("planner.clause.3", 'Normalize("format Date as %m-%d", Date)'),
    ]


def cyclist_tail():
    return [
        ("programmer.normalize.step2", call("to_numerical", {"column": "Medal", "func": MEDAL_FUNC})),
        ("programmer.normalize.step3", call("format_datetime", {"column": "Date", "format": "%m-%d"})),
        (
            "programmer.filter.step4",
            call("filter_columns", {"rel_columns": ["Date", "Cyclist", "Medal", "Country"]}),
        ),
        ("analyzer.sql", sql_block(CYCLIST_SQL)),
    ]


def worked():
    d = DATA / "worked"
    write_csv(d / "cyclists.csv", CYCLIST_HEADER, CYCLIST_ROWS)
    write_csv(
        d / "prepared_golden.csv",
        ["Date", "Cyclist", "Medal", "Country"],
        [
            ["02-28", "Alej (ESP)", "2", "ESP"],
            ["02-10", "Dav. ITA", "1", "ITA"],
            ["02-14", "Alex (ITA)", "3", "ITA"],
            ["10-19", "Mark (GBR)", "5", "GBR"],
        ],
    )
    entries = cyclist_planning()
    entries.append(("programmer.augment.step1", call("extract", {"column": "Cyclist", "func": GUARDED})))
    entries += cyclist_tail()
    write_transcript(d / "transcripts" / "cyclists.jsonl", entries)


def debug():
    d = DATA / "debug"
    write_csv(d / "cyclists.csv", CYCLIST_HEADER, CYCLIST_ROWS)
    entries = cyclist_planning()
    entries += [
        ("programmer.augment.step1", call("extract", {"column": "Cyclists", "func": PAREN_ONLY})),
        ("programmer.augment.step1.repair1", call("extract", {"column": "Cyclist", "func": PAREN_ONLY})),
        ("programmer.augment.step1.repair2", call("extract", {"column": "Cyclist", "func": GUARDED})),
    ]
    entries += cyclist_tail()
    write_transcript(d / "transcripts" / "cyclists.jsonl", entries)


# ---------------------------------------------------------------- mini dataset


class Inst:
    def __init__(self, iid, question, header, rows, answers, planner=None):
        self.id = iid
        self.question = question
        self.header = header
        self.rows = rows
        self.answers = answers
        self.planner = planner
        self.entries = []

    def say(self, tag, response):
        self.entries.append((tag, response))
        return self

    def record(self):
        j = {"id": self.id, "question": self.question, "table": {"header": self.header, "rows": self.rows},
             "answers": self.answers}
        if self.planner:
            j["options"] = {"planner": self.planner}
        return j


def mini():
    out = []
    rng = random.Random(20240611)

    # 1: the worked example
    i = Inst("m01", CYCLIST_QUESTION, CYCLIST_HEADER, CYCLIST_ROWS, ["ITA"])
    for tag, resp in cyclist_planning():
        i.say(tag, resp)
    i.say("programmer.augment.step1", call("extract", {"column": "Cyclist", "func": GUARDED}))
    for tag, resp in cyclist_tail():
        i.say(tag, resp)
    out.append(i)

    # 2: growth rate from two year columns
    i = Inst("m02", "Which country had the highest GDP growth rate from 2012 to 2013?", ["Country", "2012", "2013"],
             [["USA", "16,155", "16,692"], ["CHN", "8,532", "9,570"], ["JPN", "6,203", "5,155"],
              ["DEU", "3,527", "3,733"]], ["CHN"])
    i.say("planner.sketch", sql_block('SELECT Country, growth_rate("2012", "2013") AS GrowthRate FROM w '
                                      "ORDER BY GrowthRate DESC LIMIT 1"))
    i.say("planner.clause.1", 'Normalize("convert 2012 to numbers", "2012")\n'
                              'Normalize("convert 2013 to numbers", "2013")\n'
                              'Augment("growth rate of GDP from 2012 to 2013", ["2012", "2013"]) -> GrowthRate')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "2012", "func": "lambda x: int(x.replace(',', ''))"}))
    i.say("programmer.normalize.step2", call("to_numerical", {"column": "2013", "func": "lambda x: int(x.replace(',', ''))"}))
    i.say("programmer.augment.step3", call("calculate", {"columns": ["2012", "2013"],
                                                         "func": "lambda x: (x['2013']-x['2012'])/x['2012']"}))
    i.say("programmer.filter.step4", call("filter_columns", {"rel_columns": ["Country", "2012", "2013", "GrowthRate"]}))
    i.say("analyzer.sql", sql_block("SELECT Country FROM w ORDER BY GrowthRate DESC LIMIT 1"))
    out.append(i)

    # 3: boolean flag from a result string
    results = ["W 3-1", "L 0-2", "W 2-0", "L 1-4", "D 1-1", "L 0-1", "W 5-2"]
    i = Inst("m03", "How many games did the team lose?", ["Date", "Opponent", "Result"],
             [[f"2019-0{k + 1}-1{k}", opp, r] for k, (opp, r) in
              enumerate(zip(["Ajax", "PSV", "Feyenoord", "AZ", "Utrecht", "Twente", "Vitesse"], results))],
             [str(sum(r.startswith("L") for r in results))])
    i.say("planner.sketch", sql_block("SELECT is_loss(Result) AS IfLost, COUNT(*) FROM w WHERE IfLost = 1"))
    i.say("planner.clause.1", 'Augment("whether the game was lost", [Result]) -> IfLost')
    i.say("programmer.augment.step1", call("map_to_boolean", {"columns": ["Result"],
                                                              "func": "lambda x: x['Result'].startswith('L')"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Result", "IfLost"]}))
    i.say("analyzer.sql", sql_block("SELECT COUNT(*) FROM w WHERE IfLost = 1"))
    out.append(i)

    # 4: direct planner, concatenated names
    i = Inst("m04", "What is the full name of the top scorer?", ["First", "Last", "Goals"],
             [["Lionel", "Messi", "9"], ["Robert", "Lewandowski", "15 (2 pen)"], ["Erling", "Haaland", "12"],
              ["Kylian", "Mbappe", "11 (1 pen)"]], ["Robert Lewandowski"], planner="direct")
    i.say("planner.direct", 'Augment("full name of the player", [First, Last]) -> FullName\n'
                            'Normalize("convert Goals to numbers", Goals)\n'
                            "Filter([FullName, Goals])")
    i.say("programmer.augment.step1", call("concatenate", {"columns": ["First", "Last"],
                                                           "func": "lambda x: x['First'] + ' ' + x['Last']"}))
    i.say("programmer.normalize.step2", call("to_numerical", {"column": "Goals", "func": "lambda x: int(x.split(' ')[0])"}))
    i.say("programmer.filter.step3", call("filter_columns", {"rel_columns": ["FullName", "Goals"]}))
    i.say("analyzer.sql", sql_block("SELECT FullName FROM w ORDER BY Goals DESC LIMIT 1"))
    out.append(i)

    # 5: country spellings mapped to codes
    i = Inst("m05", "How many medals did Italy win?", ["Athlete", "Country", "Medals"],
             [["Rossi", "ITA", "2"], ["Dupont", "France", "1"], ["Bianchi", "Italia", "3"], ["Martin", "FRA", "4"],
              ["Ferrari", "Italy", "2"]], ["7"])
    i.say("planner.sketch", sql_block("SELECT SUM(Medals) FROM w WHERE Country = 'ITA'"))
    i.say("planner.clause.1", "None")
    i.say("planner.clause.2", 'Normalize("write every country as its three-letter code", Country)')
    i.say("programmer.normalize.step1", call("clean_string", {"column": "Country", "trans_dict": {
        "Italia": "ITA", "Italy": "ITA", "France": "FRA"}}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Country", "Medals"]}))
    i.say("analyzer.sql", sql_block("SELECT SUM(Medals) FROM w WHERE Country = 'ITA'"))
    out.append(i)

    # 6: model-filled column
    cities = [("Paris", "Europe"), ("Lagos", "Africa"), ("Lima", "South America"), ("Oslo", "Europe"),
              ("Osaka", "Asia"), ("Porto", "Europe")]
    i = Inst("m06", "How many of the listed cities are in Europe?", ["City", "Population"],
             [[c, str(1000 + 37 * k)] for k, (c, _) in enumerate(cities)], ["3"])
    i.say("planner.sketch", sql_block("SELECT continent_of(City) AS Continent, COUNT(*) FROM w WHERE Continent = 'Europe'"))
    i.say("planner.clause.1", 'Augment("continent the city is in", [City]) -> Continent')
    i.say("programmer.augment.step1", call("infer", {"source_columns": ["City"], "target_column": "Continent"}))
    i.say("programmer.augment.step1.infer0", "\n".join(f"row {k}: {cont}" for k, (_, cont) in enumerate(cities)))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["City", "Continent"]}))
    i.say("analyzer.sql", sql_block("SELECT COUNT(*) FROM w WHERE Continent = 'Europe'"))
    out.append(i)

    # 7: model-normalized column
    sizes = [("small", "S"), ("L", "L"), ("Large", "L"), ("medium", "M"), ("large", "L"), ("XL", "XL")]
    i = Inst("m07", "How many shirts are size L?", ["Shirt", "Size"],
             [[f"Shirt {k + 1}", raw] for k, (raw, _) in enumerate(sizes)], ["3"])
    i.say("planner.sketch", sql_block("SELECT COUNT(*) FROM w WHERE Size = 'L'"))
    i.say("planner.clause.1", 'Normalize("use the letter code of each size", Size)')
    i.say("programmer.normalize.step1", call("infer", {"column": "Size"}))
    i.say("programmer.normalize.step1.infer0", "\n".join(f"row {k}: {code}" for k, (_, code) in enumerate(sizes)))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Size"]}))
    i.say("analyzer.sql", sql_block("SELECT COUNT(*) FROM w WHERE Size = 'L'"))
    out.append(i)

    # 8: direct planner, mixed date layouts
    i = Inst("m08", "How many events took place after 2010?", ["Date", "Event"],
             [["March 3, 2009", "Launch"], ["2011-05-20", "Summit"], ["14 Feb 2012", "Gala"],
              ["Jul 1, 2015", "Expo"], ["2008-11-30", "Forum"]], ["3"], planner="direct")
    i.say("planner.direct", 'Normalize("format Date as %Y-%m-%d", Date)\nFilter([Date])')
    i.say("programmer.normalize.step1", call("format_datetime", {"column": "Date", "format": "%Y-%m-%d"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Date"]}))
    i.say("analyzer.sql", sql_block("SELECT COUNT(*) FROM w WHERE Date > '2010-12-31'"))
    out.append(i)

    # 9: ratio of two columns
    i = Inst("m09", "Which city has the highest population density?", ["City", "Population", "Area"],
             [["Arden", "120000", "40.0"], ["Brook", "95000", "19.0"], ["Calder", "300000", "150.5"],
              ["Dunmore", "41000", "10.0"]], ["Brook"])
    i.say("planner.sketch", sql_block("SELECT City, density(Population, Area) AS Density FROM w ORDER BY Density DESC LIMIT 1"))
    i.say("planner.clause.1", 'Augment("population divided by area", [Population, Area]) -> Density')
    i.say("programmer.augment.step1", call("calculate", {"columns": ["Population", "Area"],
                                                         "func": "lambda x: float(x['Population']) / float(x['Area'])"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["City", "Population", "Area", "Density"]}))
    i.say("analyzer.sql", sql_block("SELECT City FROM w ORDER BY Density DESC LIMIT 1"))
    out.append(i)

    # 10: numbers with units
    i = Inst("m10", "How tall is the tallest athlete, in meters?", ["Athlete", "Height"],
             [["Ames", "1.85 m"], ["Boyd", "1.9 m"], ["Cruz", "1.98 m"], ["Diaz", "1.77 m"]], ["1.98"])
    i.say("planner.sketch", sql_block("SELECT MAX(Height) FROM w"))
    i.say("planner.clause.1", 'Normalize("convert Height to a number of meters", Height)')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Height", "func": "lambda x: float(x.replace(' m', ''))"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Height"]}))
    i.say("analyzer.sql", sql_block("SELECT MAX(Height) FROM w"))
    out.append(i)

    # 11: a true/false statement
    i = Inst("m11", "the bulls won 50 games", ["Team", "Won", "Lost"],
             [["Hawks", "41", "41"], ["Bulls", "50", "32"], ["Nets", "28", "54"]], ["yes"])
    i.say("planner.sketch", sql_block("SELECT COUNT(*) FROM w WHERE Team = 'Bulls' AND Won = 50"))
    i.say("planner.clause.1", "None")
    i.say("planner.clause.2", "None")
    i.say("programmer.filter.step1", call("filter_columns", {"rel_columns": ["Team", "Won"]}))
    i.say("analyzer.sql", sql_block("SELECT COUNT(*) FROM w WHERE Team = 'Bulls' AND Won = 50"))
    out.append(i)

    # 12: direct planner, several answers
    i = Inst("m12", "Which players scored more than 10 goals?", ["Player", "Club", "Goals"],
             [["Kane", "Spurs", "17"], ["Salah", "Liverpool", "22"], ["Mount", "Chelsea", "6"],
              ["Vardy", "Leicester", "15"], ["Rice", "West Ham", "2"]], ["Salah", "Kane", "Vardy"], planner="direct")
    i.say("planner.direct", "Filter([Player, Goals])")
    i.say("programmer.filter.step1", call("filter_columns", {"rel_columns": ["Player", "Goals"]}))
    i.say("analyzer.sql", sql_block("SELECT Player FROM w WHERE Goals > 10"))
    out.append(i)

    # 13: a runtime failure fixed by one repair
    i = Inst("m13", "What is the total price of all items?", ["Item", "Price"],
             [["Desk", "$1,200"], ["Chair", "$350"], ["Lamp", "$95"], ["Shelf", "$2,010"]], ["3655"])
    i.say("planner.sketch", sql_block("SELECT SUM(Price) FROM w"))
    i.say("planner.clause.1", 'Normalize("convert Price to numbers", Price)')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Price", "func": "lambda x: int(x.replace('$', ''))"}))
    i.say("programmer.normalize.step1.repair1", call("to_numerical", {
        "column": "Price", "func": "lambda x: int(x.replace('$', '').replace(',', ''))"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Price"]}))
    i.say("analyzer.sql", sql_block("SELECT SUM(Price) FROM w"))
    out.append(i)

    # 14: two failed attempts, then the model fills the rest
    i = Inst("m14", "What is the average score?", ["Judge", "Score"],
             [["A", "7"], ["B", "8"], ["C", "seven"], ["D", "9"], ["E", "eight"]], ["7.8"])
    i.say("planner.sketch", sql_block("SELECT AVG(Score) FROM w"))
    i.say("planner.clause.1", 'Normalize("convert Score to numbers", Score)')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Score", "func": "lambda x: int(x)"}))
    i.say("programmer.normalize.step1.repair1", call("to_numerical", {"column": "Score", "func": "lambda x: int(x.strip())"}))
    i.say("programmer.normalize.step1.infer2", "row 2: 7\nrow 4: 8")
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Score"]}))
    i.say("analyzer.sql", sql_block("SELECT AVG(Score) FROM w"))
    out.append(i)

    # 15: medium table, totals per team
    teams = ["Lions", "Tigers", "Bears", "Wolves", "Hawks", "Sharks"]
    rows, totals = [], {t: 0 for t in teams}
    for k in range(260):
        team = rng.choice(teams)
        pts = rng.randint(0, 30) + (5 if team == "Wolves" else 0)
        totals[team] += pts
        rows.append([f"Player {k + 1}", team, f"{pts}*" if rng.random() < 0.2 else str(pts)])
    best = max(totals, key=totals.get)
    i = Inst("m15", "Which team scored the most points in total?", ["Name", "Team", "Points"], rows, [best])
    i.say("planner.sketch", sql_block("SELECT Team, SUM(Points) FROM w GROUP BY Team ORDER BY SUM(Points) DESC LIMIT 1"))
    i.say("planner.clause.1", 'Normalize("convert Points to numbers", Points)')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Points", "func": "lambda x: int(x.replace('*', ''))"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Team", "Points"]}))
    i.say("analyzer.sql", sql_block("SELECT Team FROM w GROUP BY Team ORDER BY SUM(Points) DESC LIMIT 1"))
    out.append(i)

    # 16: large table, dates in two layouts
    months = ["Jan", "Feb", "Mar", "Apr", "May", "Jun"]
    rows, march = [], 0
    for k in range(560):
        m = rng.randint(1, 6)
        d = rng.randint(1, 28)
        march += m == 3
        date = f"2021-{m:02d}-{d:02d}" if rng.random() < 0.5 else f"{months[m - 1]} {d}, 2021"
        rows.append([date, rng.choice(["North", "South", "East", "West"]), f"{rng.randint(0, 400) / 10:.1f}"])
    i = Inst("m16", "How many readings were taken in March 2021?", ["Date", "Station", "Rainfall"], rows, [str(march)])
    i.say("planner.sketch", sql_block("SELECT COUNT(*) FROM w WHERE Date LIKE '2021-03-%'"))
    i.say("planner.clause.1", 'Normalize("format Date as %Y-%m-%d", Date)')
    i.say("programmer.normalize.step1", call("format_datetime", {"column": "Date", "format": "%Y-%m-%d"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Date"]}))
    i.say("analyzer.sql", sql_block("SELECT COUNT(*) FROM w WHERE Date LIKE '2021-03-%'"))
    out.append(i)

    # 17: medium table, direct planner
    cats = ["Toys", "Books", "Garden", "Kitchen"]
    rows, best_toy, best_price = [], None, -1.0
    for k in range(240):
        cat = rng.choice(cats)
        price = rng.randint(100, 9999) / 100
        name = f"Item {k + 1:03d}"
        if cat == "Toys" and price > best_price:
            best_toy, best_price = name, price
        rows.append([name, cat, f"${price:.2f}"])
    i = Inst("m17", "What is the most expensive product in the Toys category?", ["Product", "Category", "Price"], rows,
             [best_toy], planner="direct")
    i.say("planner.direct", 'Normalize("convert Price to numbers", Price)\nFilter([Product, Category, Price])')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Price", "func": "lambda x: float(x.replace('$', ''))"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Product", "Category", "Price"]}))
    i.say("analyzer.sql", sql_block("SELECT Product FROM w WHERE Category = 'Toys' ORDER BY Price DESC LIMIT 1"))
    out.append(i)

    # 18: large table, direct planner, rounded average
    depts = ["Sales", "Support", "Research", "Finance"]
    rows, sales = [], []
    for k in range(520):
        dept = rng.choice(depts)
        pay = rng.randint(30000, 120000)
        if dept == "Sales":
            sales.append(pay)
        rows.append([f"Employee {k + 1}", dept, f"{pay:,}"])
    avg = sum(sales) / len(sales)
    i = Inst("m18", "What is the average salary in the Sales department?", ["Employee", "Dept", "Salary"], rows,
             [f"{avg:.2f}"], planner="direct")
    i.say("planner.direct", 'Normalize("convert Salary to numbers", Salary)\nFilter([Dept, Salary])')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Salary", "func": "lambda x: int(x.replace(',', ''))"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Dept", "Salary"]}))
    i.say("analyzer.sql", sql_block("SELECT AVG(Salary) FROM w WHERE Dept = 'Sales'"))
    out.append(i)

    # 19: average that only matches within the gold's precision
    i = Inst("m19", "What is the average rating of these films?", ["Film", "Rating"],
             [["Arrival", "8.1/10"], ["Brooklyn", "7.2/10"], ["Carol", "6.9/10"], ["Dunkirk", "7.6/10"]], ["7.45"])
    i.say("planner.sketch", sql_block("SELECT AVG(Rating) FROM w"))
    i.say("planner.clause.1", 'Normalize("convert Rating to a number out of ten", Rating)')
    i.say("programmer.normalize.step1", call("to_numerical", {"column": "Rating", "func": "lambda x: float(x.split('/')[0])"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Rating"]}))
    i.say("analyzer.sql", sql_block("SELECT AVG(Rating) FROM w"))
    out.append(i)

    # 20: direct planner, year pulled out of free text
    i = Inst("m20", "Which club is the oldest?", ["Club", "Founded"],
             [["Rovers", "founded in 1902"], ["United", "est. 1878"], ["Athletic", "1899 (as Thames)"],
              ["City", "founded 1894"]], ["United"], planner="direct")
    i.say("planner.direct", 'Normalize("keep only the founding year as a number", Founded)\nFilter([Club, Founded])')
    i.say("programmer.normalize.step1", call("to_numerical", {
        "column": "Founded", "func": r"lambda x: int(re.search(r'(\d{4})', x).group(1))"}))
    i.say("programmer.filter.step2", call("filter_columns", {"rel_columns": ["Club", "Founded"]}))
    i.say("analyzer.sql", sql_block("SELECT Club FROM w ORDER BY Founded ASC LIMIT 1"))
    out.append(i)

    d = DATA / "mini"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "dataset.jsonl", "w") as f:
        for inst in out:
            f.write(json.dumps(inst.record()) + "\n")
    for inst in out:
        write_transcript(d / "transcripts" / f"{inst.id}.jsonl", inst.entries)


def main():
    worked()
    debug()
    mini()


if __name__ == "__main__":
    main()
