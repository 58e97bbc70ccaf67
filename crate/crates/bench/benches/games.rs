use criterion::{criterion_group, criterion_main, Criterion};
use psro_core::eval::{exact_best_response, expected_utility, WeightedProfile};
use psro_core::games::GameSpec;
use psro_core::policy::BehavioralPolicy;
use psro_core::response::{train_best_response, LearnerState};
use psro_core::rng::{domain, stream};
use psro_core::{simulate_episode, MetaStrategy, PolicyBundle};

fn bench_expected_utility(c: &mut Criterion) {
    let mut group = c.benchmark_group("expected_utility");
    for (label, spec) in [
        ("kuhn", GameSpec::KuhnPoker),
        ("leduc", GameSpec::LeducPoker),
        (
            "goofspiel_2p5c",
            GameSpec::Goofspiel {
                num_players: 2,
                num_cards: 5,
            },
        ),
    ] {
        let game = spec.build().unwrap();
        let profile: Vec<BehavioralPolicy> = (0..2)
            .map(|p| BehavioralPolicy::uniform(&game, p))
            .collect();
        let refs: Vec<&BehavioralPolicy> = profile.iter().collect();
        group.bench_function(label, |b| {
            b.iter(|| expected_utility(&game, &refs).unwrap())
        });
    }
    group.finish();
}

fn bench_best_response(c: &mut Criterion) {
    let game = GameSpec::LeducPoker.build().unwrap();
    let profile: Vec<BehavioralPolicy> = (0..2)
        .map(|p| BehavioralPolicy::uniform(&game, p))
        .collect();
    let mixture = vec![WeightedProfile {
        weight: 1.0,
        seats: profile.iter().collect(),
    }];
    c.bench_function("exact_best_response_leduc", |b| {
        b.iter(|| exact_best_response(&game, 0, &mixture).unwrap())
    });
}

fn bench_episodes(c: &mut Criterion) {
    let game = GameSpec::KuhnPoker.build().unwrap();
    let profile: Vec<BehavioralPolicy> = (0..2)
        .map(|p| BehavioralPolicy::uniform(&game, p))
        .collect();
    let refs: Vec<&BehavioralPolicy> = profile.iter().collect();
    let mut rng = stream(3, &[domain::EVAL, 50]);
    c.bench_function("simulate_episode_kuhn", |b| {
        b.iter(|| simulate_episode(&game, &refs, &mut rng).unwrap())
    });

    let bundle = PolicyBundle::uniform(&game);
    let sigma = MetaStrategy::new(vec![1.0]).unwrap();
    c.bench_function("train_1000_episodes_kuhn", |b| {
        b.iter(|| {
            let mut learner = LearnerState::new(0.05);
            train_best_response(
                &game,
                0,
                &[&bundle],
                &sigma,
                1000,
                0.0,
                &[],
                0.1,
                &mut learner,
                17,
                1,
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_expected_utility,
    bench_best_response,
    bench_episodes
);
criterion_main!(benches);
