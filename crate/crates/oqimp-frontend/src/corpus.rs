//! Bundled example programs.

pub const SIN: &str = include_str!("../corpus/sin.qimp");
pub const COS: &str = include_str!("../corpus/cos.qimp");
pub const ARCSINE: &str = include_str!("../corpus/arcsine.qimp");
pub const PHASE: &str = include_str!("../corpus/phase.qimp");
pub const CHACHA_QR: &str = include_str!("../corpus/chacha_qr.qimp");
pub const CHACHA_QR_LISTING: &str = include_str!("../corpus/chacha_qr_listing.qimp");
pub const CHACHA_DOUBLE: &str = include_str!("../corpus/chacha_double.qimp");
pub const CHACHA20: &str = include_str!("../corpus/chacha20.qimp");
pub const XY_CC: &str = include_str!("../corpus/xy_cc.qimp");
pub const XY_CQ: &str = include_str!("../corpus/xy_cq.qimp");
pub const XY_QQ: &str = include_str!("../corpus/xy_qq.qimp");

/// (file name, source) for every bundled program.
pub const ALL: &[(&str, &str)] = &[
    ("sin.qimp", SIN),
    ("cos.qimp", COS),
    ("arcsine.qimp", ARCSINE),
    ("phase.qimp", PHASE),
    ("chacha_qr.qimp", CHACHA_QR),
    ("chacha_qr_listing.qimp", CHACHA_QR_LISTING),
    ("chacha_double.qimp", CHACHA_DOUBLE),
    ("chacha20.qimp", CHACHA20),
    ("xy_cc.qimp", XY_CC),
    ("xy_cq.qimp", XY_CQ),
    ("xy_qq.qimp", XY_QQ),
];

pub fn get(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".qimp").unwrap_or(name);
    ALL.iter().find(|(n, _)| n.strip_suffix(".qimp") == Some(stem)).map(|(_, s)| *s)
}
