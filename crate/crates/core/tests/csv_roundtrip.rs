use proptest::prelude::*;
use sigpde_core::csv_io::{load_csv_labeled, load_csv_path, write_csv};
use sigpde_core::{Error, LabeledSeries, Layout, TimeSeries};

fn series(dim: usize) -> impl Strategy<Value = TimeSeries> {
    (1usize..8).prop_flat_map(move |len| {
        (
            prop::collection::vec(1e-3f64..10.0, len),
            prop::collection::vec(-1e6f64..1e6, len * dim),
        )
            .prop_map(move |(gaps, values)| {
                let times = gaps
                    .iter()
                    .scan(-1.0, |t, g| {
                        *t += g;
                        Some(*t)
                    })
                    .collect();
                TimeSeries::new(times, values, dim).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn long_layout_round_trips(
        input in (1usize..4).prop_flat_map(|dim| prop::collection::vec(series(dim), 1..5))
    ) {
        let input: Vec<LabeledSeries> = input
            .into_iter()
            .enumerate()
            .map(|(k, series)| LabeledSeries { id: format!("s{k}"), series })
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &input, Layout::Long).unwrap();
        let back = load_csv_labeled(buf.as_slice(), Layout::Long).unwrap();
        prop_assert_eq!(back, input);
    }

    #[test]
    fn wide_layout_round_trips(s in series(2)) {
        let input = vec![LabeledSeries { id: String::new(), series: s }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &input, Layout::Wide).unwrap();
        let back = load_csv_labeled(buf.as_slice(), Layout::Wide).unwrap();
        prop_assert_eq!(back, input);
    }
}

#[test]
fn missing_file_names_the_path() {
    let err = load_csv_path(std::path::Path::new("/nonexistent/paths.csv"), Layout::Wide).unwrap_err();
    assert!(matches!(err, Error::File { .. }));
    assert!(err.to_string().contains("/nonexistent/paths.csv"));
}

#[test]
fn non_numeric_field_cites_line() {
    let err = load_csv_labeled("series_id,t,c1\na,0,1\na,1,oops\n".as_bytes(), Layout::Long).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
}
