use qsl_core::qspecial::{zeros_of, TrigKind};

fn main() {
    for &q in &[0.3f64, 0.5, 0.8] {
        println!("q = {q}");
        for (kind, tag, shift) in [(TrigKind::Sin, "sin", 0.0), (TrigKind::Cos, "cos", -0.5)] {
            let zs = zeros_of(kind, q, 10).unwrap();
            let devs: Vec<f64> = (3..=10)
                .map(|n| {
                    let z = zs[n - 1];
                    (z * (1.0 - q) * q.powf(n as f64 + shift) - 1.0).abs()
                })
                .collect();
            let ratios: Vec<String> = devs.windows(2).map(|w| format!("{:.3}", w[1] / w[0])).collect();
            println!("  {tag} devs {:?}", devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>());
            println!("  {tag} ratios {ratios:?}");
        }
    }
}
