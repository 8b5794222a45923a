use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use mubkit_core::cipher::{hn_spec, wn_spec};
use mubkit_core::circuit::verify_circuit;
use mubkit_core::gf2n::FieldContext;
use mubkit_core::hilbert::{OrthonormalBasis, Povm};
use mubkit_core::keyanalysis::{key_guess_povm, mes_search, povm_key_entropy, MesConfig};
use mubkit_core::mub::MubFamily;
use mubkit_core::stream::KeystreamGenerator;

fn field(c: &mut Criterion) {
    let ctx = FieldContext::new(8, None).unwrap();
    c.bench_function("gf256 mul table", |b| {
        b.iter(|| {
            let mut acc = 0u32;
            for x in 0..256 {
                acc ^= ctx.mul(black_box(x), 0x53);
            }
            acc
        })
    });
}

fn construction(c: &mut Criterion) {
    c.bench_function("mub family n=4", |b| b.iter(|| MubFamily::with_default_field(black_box(4)).unwrap()));
    let family = MubFamily::with_default_field(3).unwrap();
    c.bench_function("certify n=3", |b| b.iter(|| family.certify_full().unwrap()));
}

fn analysis(c: &mut Criterion) {
    let h6 = hn_spec(6).unwrap();
    let comp = Povm::projective(&OrthonormalBasis::computational(h6.dim()));
    c.bench_function("key entropy H_6 computational", |b| {
        b.iter(|| povm_key_entropy(&h6, 0, &comp).unwrap())
    });
    let w3 = wn_spec(&MubFamily::with_default_field(3).unwrap());
    c.bench_function("key guess povm W_3", |b| b.iter(|| key_guess_povm(&w3, 0).unwrap()));
    let w2 = wn_spec(&MubFamily::with_default_field(2).unwrap());
    let cfg = MesConfig::default().with_restarts(16);
    c.bench_function("mes search W_2 16 restarts", |b| b.iter(|| mes_search(w2.bases(), &cfg).unwrap()));
}

fn circuit_and_stream(c: &mut Criterion) {
    let ctx = FieldContext::new(2, None).unwrap();
    c.bench_function("verify circuit n=2", |b| b.iter(|| verify_circuit(&ctx).unwrap()));
    let generator = KeystreamGenerator::new(&[7u8; 32], 8, 1 << 16, 0).unwrap();
    c.bench_function("keystream 64 Kibit", |b| b.iter(|| generator.keystream(0, 1 << 16).unwrap()));
}

criterion_group!(benches, field, construction, analysis, circuit_and_stream);
criterion_main!(benches);
