# CurveKit 应用包
