//! Regenerates the synthetic inversion inputs shipped under configs/:
//! noiseless P+SV→SV symbol measurements on the medium
//! (λ, μ, A, B) = (2, 1, 0.3, −0.4), and straight-ray travel times.
//!
//! Usage: cargo run --example make_demo_data [out_dir]

use elastowave::inversion::{Measurement, Traversal};
use elastowave::kinematics::WaveMode;
use elastowave::medium::MaterialPoint;
use elastowave::resonance::{sample::resonant_pair, InteractionCase};
use elastowave::symbols::closed_form_amplitude;
use num_complex::Complex64;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "configs".to_string());
    let p = MaterialPoint::new(2.0, 1.0, 0.3, -0.4, 0.0).unwrap();
    let one = Complex64::new(1.0, 0.0);

    let mut ms: Vec<Measurement> = Vec::new();
    for (alpha, amp2) in [
        (0.7, 0.8),
        (1.2, 1.1),
        (1.9, 0.6),
        (2.4, 1.4),
    ] {
        let a2 = Complex64::new(amp2, 0.0);
        let (_, _, inp) =
            resonant_pair(InteractionCase::PSvToSv, &p, alpha, 0, one, a2, (1.0, 1.0)).unwrap();
        let measured = closed_form_amplitude(InteractionCase::PSvToSv, &p, &inp);
        ms.push(Measurement {
            case: InteractionCase::PSvToSv,
            alpha: inp.alpha,
            psi: inp.psi,
            r1: inp.r1,
            r2: inp.r2,
            r_out: inp.r_out,
            amp1: inp.amp1,
            amp2: inp.amp2,
            measured,
            noise_level: 0.0,
        });
    }
    let path = format!("{dir}/measurements_psv.json");
    std::fs::write(&path, serde_json::to_string_pretty(&ms).unwrap()).unwrap();
    println!("wrote {path} ({} measurements)", ms.len());

    let (cp, cs) = elastowave::medium::wave_speeds(&p).unwrap();
    let ts: Vec<Traversal> = (1..5)
        .flat_map(|i| {
            let chord = 0.9 * i as f64;
            [
                Traversal {
                    chord,
                    mode: WaveMode::P,
                    time: chord / cp,
                },
                Traversal {
                    chord,
                    mode: WaveMode::S,
                    time: chord / cs,
                },
            ]
        })
        .collect();
    let path = format!("{dir}/travel_times.json");
    std::fs::write(&path, serde_json::to_string_pretty(&ts).unwrap()).unwrap();
    println!("wrote {path} ({} traversals)", ts.len());
}
