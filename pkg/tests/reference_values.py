"""Reference values at the codimension-4 point and along the l1 = l2 = 0 curves.

All vectors use the q1 = -i eigenvector convention.
"""

Q_ROUNDED = dict(beta=0.93593, alpha=1.02753, kappa=0.90164)
Q_EPSILON_C = 0.73522

Q_P = [-0.5j, 0.27041 - 0.54618j, 0.40395 + 0.20000j]
Q_Q = [-1j, 0.36401, 0.99407]

Q_H = {
    (1, 1): [-2.65769, 0, 0.19650],
    (2, 0): [-4.11029 - 0.18429j, 0.13416 - 2.99241j, 0.09159 - 3.36395j],
    (3, 0): [-3.63589 + 23.03616j, -25.15645 - 3.97054j, -18.16113 - 1.69167j],
    (2, 1): [3.24775 + 1.67247j, -4.52694 + 1.18222j, 4.85950 + 3.71541j],
    (4, 0): [160.39204 + 51.10539j, -74.41230 + 233.53975j, -25.03366 + 127.34049j],
    (3, 1): [-69.44664 - 38.56274j, 25.90851 - 2.24484j, 36.10391 - 65.85524j],
    (2, 2): [-64.50829, 0, 10.76131],
    (5, 0): [702.48693 - 1263.93346j, 2300.44688 + 1278.57511j, 1054.20770 + 363.36145j],
    (3, 2): [178.24934 + 273.66781j, -233.17715 + 26.70966j, 395.89053 + 272.77265j],
    (4, 1): [-521.71430 + 1074.26121j, -631.58388 - 484.25803j, -865.10385 - 413.20000j],
    (6, 0): [-10130.73267 - 9995.21750j, 21830.38995 - 22126.36639j, 5429.65950 - 9557.27148j],
    (5, 1): [14227.43860 + 8237.49829j, -9991.87299 + 14431.55078j, -5753.08267 + 11280.54380j],
    (4, 2): [-4351.45992 - 4936.33553j, 2272.08822 + 1527.90723j, 4841.97866 - 5445.36779j],
    (3, 3): [-5969.63958, 0, 1764.47230],
    (7, 0): [-146941.54096 + 63522.80004j, -161862.28504 - 374421.36634j, -86069.40319 - 83969.45215j],
    (6, 1): [140223.18890 - 184094.16057j, 260780.07852 + 213929.28545j, 151116.49070 + 92225.27059j],
    (5, 2): [-105557.32750 + 127994.80577j, -41289.02476 - 79039.91108j, -106857.14273 - 88122.45467j],
    (4, 3): [26579.27090 + 62051.16515j, -36944.56779 + 2499.10743j, 78144.32459 + 54070.14624j],
    (8, 0): [-247681.58290 + 2173895.03048j, -6330624.44741 - 721276.35507j, -1324248.15135 + 594661.38331j],
    (7, 1): [-2230744.30930 - 2511854.85381j, 4663683.99275 - 4038564.75411j, 1618564.33911 - 2037646.14488j],
    (6, 2): [2540059.79128 + 2277848.86298j, -2385453.21697 + 1869088.06376j, -1708253.47087 + 2025268.53034j],
    (5, 3): [-633499.15640 - 1125590.51413j, 390598.08062 + 466226.40735j, 1219484.73373 - 1101283.41903j],
    (4, 4): [-1118100.12194, 0.00138, 546721.10946],
}

Q_G = {
    (2, 1): -3.91814j,
    (3, 2): -153.21726j,
    (4, 3): -22328.21224j,
    (5, 4): -22071.41115 - 5991090.52119j,
}
Q_L4 = -7.66368

Q_GRADIENTS = [
    (-0.46264, 0.13437, -0.97565),
    (-12.44701, 2.66791, -19.19345),
    (-266.77145, 41.80505, -372.84969),
]
Q_GRADIENT_DET = -33.31133

# (kappa, alpha, beta, l3)
C1_TABLE = [
    (0.45, 0.33319, 0.72216, -0.91310),
    (0.5, 0.42968, 0.71770, -0.92567),
    (0.55, 0.50934, 0.71257, -0.88152),
    (0.6, 0.57913, 0.70665, -0.82064),
    (0.65, 0.64241, 0.69983, -0.75810),
    (0.7, 0.70113, 0.69201, -0.70006),
    (0.75, 0.75659, 0.68309, -0.64900),
    (0.8, 0.80972, 0.67302, -0.60580),
    (0.85, 0.86120, 0.66177, -0.57054),
    (0.9, 0.91154, 0.64940, -0.54288),
    (0.95, 0.96114, 0.63600, -0.52217),
]

C2_TABLE = [
    (0.0, 0.85050, 0.86828, 0.39050),
    (0.2, 0.90524, 0.87760, 0.46294),
    (0.3, 0.93123, 0.88397, 0.50684),
    (0.4, 0.95511, 0.89159, 0.55538),
    (0.5, 0.97602, 0.90042, 0.60637),
    (0.6, 0.99330, 0.91029, 0.65253),
    (0.7, 1.00674, 0.92071, 0.66963),
    (0.8, 1.01697, 0.93045, 0.56860),
    (0.9, 1.02731, 0.93592, 0.01665),
    (0.92, 1.03020, 0.93585, -0.20674),
    (0.98, 1.04319, 0.93201, -1.09289),
]
