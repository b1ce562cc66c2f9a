use retarget_core::scenario::tables::{reproduce_table, TableId};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn text_tables_match_golden_files() {
    for id in TableId::ALL {
        let table = reproduce_table(id).unwrap();
        assert_eq!(table.to_text(), golden(&format!("{id}.txt")), "{id}");
    }
}

#[test]
fn csv_tables_match_golden_files() {
    for id in TableId::ALL {
        let table = reproduce_table(id).unwrap();
        assert_eq!(table.to_csv(), golden(&format!("{id}.csv")), "{id}");
    }
}

#[test]
fn csv_parses_back_to_the_same_cells() {
    for id in TableId::ALL {
        let table = reproduce_table(id).unwrap();
        let csv = table.to_csv();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, table.header);
        let rows: Vec<Vec<String>> = reader
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        assert_eq!(rows, table.rows);
    }
}

#[test]
fn rationality_rows() {
    let t = reproduce_table(TableId::Rationalities).unwrap();
    let expect: [[&str; 6]; 8] = [
        ["1", "1", "1", "0", "1", "0"],
        ["0", "0", "0", "1", "0", "1"],
        ["0", "1", "0", "1", "1", "1"],
        ["1", "0", "1", "0", "0", "0"],
        ["1", ".993", "1", ".007", ".993", ".007"],
        [".000", ".007", ".000", ".993", ".007", ".993"],
        ["1", ".5", "1", ".5", ".5", ".5"],
        ["0", ".5", "0", ".5", ".5", ".5"],
    ];
    for (row, want) in t.rows.iter().zip(expect) {
        assert_eq!(row[1..], want);
    }
}

#[test]
fn counterexample_rows_match_reference_values() {
    let t = reproduce_table(TableId::Counterexample).unwrap();
    let values: Vec<Vec<&str>> = t
        .rows
        .iter()
        .map(|r| r[1..].iter().map(String::as_str).collect())
        .collect();
    let a = vec!["1", "0", "0", "0"];
    let b = vec!["0", "2", "2", "2"];
    assert_eq!(
        values,
        vec![a.clone(), b.clone(), b.clone(), a.clone(), b, a]
    );
}
