use closing_cli::mapfile::{parse, BandRef, DiskRef, MapFile, Stanza};
use closing_core::{Band, BumpProfile, Disk, Point2};
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = BumpProfile> {
    (0.01f64..0.5, 0.01f64..0.5).prop_map(|(a, w)| BumpProfile::new(a, (a + w).min(1.0)).unwrap())
}

fn band() -> impl Strategy<Value = Band> {
    (0.0f64..0.9, 0.001f64..0.1).prop_map(|(lo, w)| Band::new(lo, lo + w).unwrap())
}

fn disk() -> impl Strategy<Value = Disk> {
    (-2.0f64..2.0, -2.0f64..2.0, 1e-6f64..0.4999).prop_map(|(x, y, r)| Disk::new(Point2::new(x, y), r).unwrap())
}

fn stanza() -> impl Strategy<Value = Stanza> {
    prop_oneof![
        (any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3f64..1e3)
            .prop_map(|(a, b)| Stanza::Translate { a, b }),
        (-1.0f64..1.0, band(), profile()).prop_map(|(eps, b, profile)| Stanza::HShear {
            eps,
            band: BandRef::Inline(b),
            profile
        }),
        (-1.0f64..1.0, band(), profile()).prop_map(|(eps, b, profile)| Stanza::VShear {
            eps,
            band: BandRef::Inline(b),
            profile
        }),
        (disk(), -10.0f64..10.0, profile()).prop_map(|(d, t, profile)| Stanza::DiskTwist {
            disk: DiskRef::Inline(d),
            t,
            profile
        }),
        (-10.0f64..10.0, profile()).prop_map(|(t, profile)| Stanza::DiskTwist {
            disk: DiskRef::Named("core".into()),
            t,
            profile
        }),
        (-1.0f64..1.0, profile()).prop_map(|(eps, profile)| Stanza::HShear {
            eps,
            band: BandRef::Named("strip".into()),
            profile
        }),
    ]
}

fn mapfile() -> impl Strategy<Value = MapFile> {
    (disk(), band(), prop::collection::vec(stanza(), 0..12)).prop_map(|(d, b, stanzas)| {
        let mut f = MapFile {
            stanzas,
            ..Default::default()
        };
        f.disks.insert("core".into(), d);
        f.bands.insert("strip".into(), b);
        f
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(file in mapfile()) {
        let text = file.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back.to_map(), file.to_map());
    }

    #[test]
    fn parser_never_panics(text in "(order=right-to-left\n)?([a-z=0-9.,# \n-]{0,80})") {
        let _ = parse(&text);
    }
}
