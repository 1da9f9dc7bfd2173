mod common;

use std::sync::Arc;

use common::*;
use opir::net::{
    decode_answer, decode_error, decode_query, encode_answer, encode_query, read_database,
    run_remote_session, transcript_from_bytes, transcript_to_bytes, write_database, DecodeError,
    ErrorCode, FrameType, Hello, NetError, RemoteSession, ServerHandle, SessionConfig, TcpServer,
};
use opir::protocol::{run_session, PartitionQuery, RoundAnswer};
use proptest::prelude::*;

fn example_server() -> ServerHandle {
    let ex = example();
    TcpServer::bind("127.0.0.1:0", ex.params, ex.cauchy, ex.db)
        .unwrap()
        .spawn()
        .unwrap()
}

#[test]
fn example_query_roundtrip_keeps_order() {
    let q = PartitionQuery::new(
        1,
        vec![
            vec![4, 5, 6],
            vec![1, 2, 3],
            vec![10, 11, 12],
            vec![7, 8, 9],
        ],
    );
    assert_eq!(decode_query(&encode_query(&q), 12).unwrap(), q);
}

#[test]
fn example_round_three_answer_is_fourteen_bytes() {
    let ex = example();
    let out = run_session(
        ex.params,
        ex.cauchy,
        ex.db,
        &EXAMPLE_SIDE,
        &EXAMPLE_DEMANDS,
        EXAMPLE_SEED,
    )
    .unwrap();
    let bytes = encode_answer(&out.transcript.rounds[2].answer);
    assert_eq!(bytes.len(), 14);
    assert_eq!(
        decode_answer(&bytes, 17).unwrap(),
        out.transcript.rounds[2].answer
    );
}

#[test]
fn decode_errors() {
    let overlap = encode_query(&PartitionQuery::new(1, vec![vec![1, 2], vec![2, 3]]));
    assert!(matches!(
        decode_query(&overlap, 4),
        Err(DecodeError::InvalidPartition(_))
    ));
    assert!(matches!(
        decode_query(&[], 4),
        Err(DecodeError::Truncated { .. })
    ));
    let bad = encode_answer(&RoundAnswer {
        round: 1,
        symbols: 1,
        packets: vec![vec![17]],
    });
    assert_eq!(
        decode_answer(&bad, 17),
        Err(DecodeError::NonCanonical { value: 17, q: 17 })
    );
}

#[test]
fn transcript_file_roundtrip() {
    let ex = example();
    let out = run_session(
        ex.params,
        ex.cauchy,
        ex.db,
        &EXAMPLE_SIDE,
        &EXAMPLE_DEMANDS,
        EXAMPLE_SEED,
    )
    .unwrap();
    let bytes = transcript_to_bytes(&out.transcript);
    assert_eq!(&bytes[..6], b"OPIR\x01\x03");
    assert_eq!(transcript_from_bytes(&bytes).unwrap(), out.transcript);
    assert!(transcript_from_bytes(&bytes[..bytes.len() - 1]).is_err());
}

fn loopback_case(
    params: opir::protocol::ProtocolParams,
    cauchy: Arc<opir::cauchy::CauchyMatrix>,
    db: Arc<opir::protocol::Database>,
    side: &[usize],
    demands: &[usize],
    seed: u64,
) {
    let server = TcpServer::bind("127.0.0.1:0", params, Arc::clone(&cauchy), Arc::clone(&db))
        .unwrap()
        .spawn()
        .unwrap();
    let local = run_session(params, cauchy, Arc::clone(&db), side, demands, seed).unwrap();
    let values = side.iter().map(|&i| db.message(i).to_vec()).collect();
    let request = Hello::request(params.k() as u32, params.side_len() as u32, 0, 0);
    let remote =
        run_remote_session(server.local_addr, &request, side, values, demands, seed).unwrap();
    assert_eq!(
        transcript_to_bytes(&remote.transcript),
        transcript_to_bytes(&local.transcript)
    );
    assert_eq!(remote.recovered, local.recovered);
}

#[test]
fn loopback_matches_in_process() {
    let ex = example();
    loopback_case(
        ex.params,
        ex.cauchy,
        ex.db,
        &EXAMPLE_SIDE,
        &EXAMPLE_DEMANDS,
        EXAMPLE_SEED,
    );
    let (params, cauchy) = grid_setup(12, 2, 2);
    let db = random_db(&params, 8);
    for seed in 1..4 {
        let (side, demands, _) = random_session(params, &cauchy, &db, 3, seed);
        loopback_case(
            params,
            Arc::clone(&cauchy),
            Arc::clone(&db),
            &side,
            &demands,
            seed,
        );
    }
}

#[test]
fn round_two_first_is_protocol_order() {
    let server = example_server();
    let mut s = RemoteSession::connect(server.local_addr, &Hello::default()).unwrap();
    let q = PartitionQuery::new(2, vec![(1..=6).collect(), (7..=12).collect()]);
    match s.exchange(&q) {
        Err(NetError::Remote { code, .. }) => assert_eq!(code, ErrorCode::ProtocolOrder),
        other => panic!("expected an ERROR frame, got {other:?}"),
    }
}

#[test]
fn mismatched_k_is_param_mismatch() {
    let server = example_server();
    match RemoteSession::connect(server.local_addr, &Hello::request(8, 0, 0, 0)) {
        Err(NetError::Remote { code, message }) => {
            assert_eq!(code, ErrorCode::ParamMismatch);
            assert!(message.contains('K'));
        }
        other => panic!("expected an ERROR frame, got {other:?}"),
    }
}

#[test]
fn malformed_query_and_frames() {
    let server = example_server();
    let mut s = RemoteSession::connect(server.local_addr, &Hello::default()).unwrap();
    let q = PartitionQuery::new(1, vec![(1..=6).collect(), (7..=12).collect()]);
    assert!(matches!(
        s.exchange(&q),
        Err(NetError::Remote {
            code: ErrorCode::MalformedQuery,
            ..
        })
    ));

    let mut s = RemoteSession::connect(server.local_addr, &Hello::default()).unwrap();
    s.send_frame(FrameType::Answer, &[]).unwrap();
    let frame = s.recv_frame().unwrap();
    assert_eq!(frame.kind, FrameType::Error);
    assert_eq!(
        decode_error(&frame.payload).unwrap().0,
        ErrorCode::ProtocolOrder
    );
}

#[test]
fn rounds_exhausted_over_the_wire() {
    let server = example_server();
    let ex = example();
    let out = run_session(
        ex.params,
        ex.cauchy,
        ex.db,
        &EXAMPLE_SIDE,
        &EXAMPLE_DEMANDS,
        EXAMPLE_SEED,
    )
    .unwrap();
    let mut s = RemoteSession::connect(server.local_addr, &Hello::default()).unwrap();
    for r in &out.transcript.rounds {
        assert_eq!(s.exchange(&r.query).unwrap(), r.answer);
    }
    let extra = PartitionQuery::new(4, vec![(1..=12).collect()]);
    assert!(matches!(
        s.exchange(&extra),
        Err(NetError::Remote {
            code: ErrorCode::RoundsExhausted,
            ..
        })
    ));
}

#[test]
fn config_loads_database() {
    let dir = tempfile::tempdir().unwrap();
    let ex = example();
    write_database(
        &mut std::fs::File::create(dir.path().join("db.bin")).unwrap(),
        &ex.db,
    )
    .unwrap();
    let path = dir.path().join("server.toml");
    std::fs::write(&path, "k = 12\nside = 2\nq = 17\ndatabase = \"db.bin\"\n").unwrap();
    let (params, cauchy, db) = SessionConfig::load(&path).unwrap().resolve().unwrap();
    assert_eq!(params, ex.params);
    assert_eq!(cauchy, ex.cauchy);
    assert_eq!(db, ex.db);

    std::fs::write(&path, "k = 8\nside = 1\nq = 17\ndatabase = \"db.bin\"\n").unwrap();
    assert!(SessionConfig::load(&path).unwrap().resolve().is_err());
    let bytes = std::fs::read(dir.path().join("db.bin")).unwrap();
    assert_eq!(read_database(&mut bytes.as_slice()).unwrap(), *ex.db);
}

fn partition_strategy() -> impl Strategy<Value = (usize, PartitionQuery)> {
    (1usize..40, 1usize..6, any::<u64>(), 1usize..5).prop_map(|(k, parts, seed, round)| {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (1..=k).collect();
        idx.shuffle(&mut rng);
        let parts = parts.min(k);
        let blocks: Vec<Vec<usize>> = idx
            .chunks(k.div_ceil(parts))
            .map(<[usize]>::to_vec)
            .collect();
        (k, PartitionQuery::new(round, blocks))
    })
}

proptest! {
    #[test]
    fn query_roundtrip((k, q) in partition_strategy()) {
        prop_assert_eq!(decode_query(&encode_query(&q), k).unwrap(), q);
    }

    #[test]
    fn answer_roundtrip(round in 1usize..10, symbols in 1usize..5, n in 0usize..20, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let q = 65521;
        let answer = RoundAnswer {
            round,
            symbols,
            packets: (0..n).map(|_| (0..symbols).map(|_| rng.random_range(0..q)).collect()).collect(),
        };
        let bytes = encode_answer(&answer);
        prop_assert_eq!(bytes.len(), 6 + 4 * n * symbols);
        prop_assert_eq!(decode_answer(&bytes, q).unwrap(), answer);
    }

    #[test]
    fn transcript_roundtrip(grid in 0..GRID.len(), seed in any::<u64>()) {
        let (k, m) = GRID[grid];
        let (params, cauchy) = grid_setup(k, m, 2);
        let db = random_db(&params, seed);
        let (_, _, out) = random_session(params, &cauchy, &db, params.max_rounds(), seed);
        let t = out.unwrap().transcript;
        let bytes = transcript_to_bytes(&t);
        prop_assert_eq!(transcript_from_bytes(&bytes).unwrap(), t);
    }

    #[test]
    fn truncated_queries_never_panic((k, q) in partition_strategy(), cut in any::<prop::sample::Index>()) {
        let bytes = encode_query(&q);
        let cut = cut.index(bytes.len());
        prop_assert!(decode_query(&bytes[..cut], k).is_err());
    }
}
